#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "polymer/errors.hpp"

namespace polymer {

enum class ChargeKind { Gaussian, Lattice };

/// Exact law of the charge sum over a block of ell sites (lattice models).
struct OmegaLaw {
  std::int64_t ell = 0;
  std::vector<double> support;  // strictly increasing
  std::vector<double> probs;    // sum to 1 within 1e-10
};

struct TiltStats {
  double f;          // -log M(delta)
  double rho_delta;  // tilted mean M'(delta)/M(delta)
  double var0;       // tilted variance of a single charge
};

/// Charge distribution together with evaluators of the site weight
///
///     gstar(ell) = log E[ exp(delta*Omega_ell - beta*Omega_ell^2) ],
///     Omega_ell = omega_1 + ... + omega_ell,
///
/// and its delta- and beta-derivatives. The base law is standardized
/// (mean 0, variance 1). Gaussian uses the closed form; finite lattice laws
/// use the exact law of Omega_ell built by binary-doubling convolution on
/// the span grid. Models are immutable after construction and safe to share
/// across threads.
class ChargeModel {
 public:
  static ChargeModel gaussian();

  /// Finite-support lattice law. Values must be distinct, probabilities in
  /// (0,1] summing to 1. With standardize=false the law must already have
  /// mean 0 and variance 1 (within 1e-9); with standardize=true it is
  /// rescaled affinely first. All values must be integer multiples of a
  /// common span T > 0.
  static ChargeModel lattice(std::vector<double> values, std::vector<double> probs,
                             bool standardize = false);

  /// Parses {"kind":"gaussian"} or
  /// {"kind":"lattice","values":[...],"probs":[...],"standardize":bool}.
  /// Throws ConfigError naming the violated invariant.
  static ChargeModel from_json_text(const std::string& text);
  static ChargeModel from_json_file(const std::string& path);

  ChargeKind kind() const { return kind_; }
  bool is_lattice() const { return kind_ == ChargeKind::Lattice; }

  /// Largest block length accepted by gstar() for lattice models.
  std::int64_t ell_max() const { return ell_max_; }

  /// Maximal span T with all charge values in T*Z (lattice only).
  double lattice_span() const;
  const std::vector<double>& lattice_values() const;
  const std::vector<double>& lattice_probs() const;

  /// Essential supremum of the charge law: +infinity for Gaussian.
  double ess_sup() const;

  double gstar(std::int64_t ell, double delta, double beta) const;

  /// (d/d delta, d/d beta) of gstar: the tilted first moment of Omega_ell
  /// and minus its tilted second moment.
  std::pair<double, double> gstar_grad(std::int64_t ell, double delta, double beta) const;

  /// (-log M(delta), tilted mean, tilted variance) of a single charge.
  TiltStats tilt_stats(double delta) const;

  /// Exact law of Omega_ell (lattice models only).
  OmegaLaw omega_law(std::int64_t ell) const;

 private:
  ChargeModel() = default;

  struct Law {  // probabilities on the grid {(offset+k)*span : k}
    std::int64_t offset = 0;
    std::vector<double> probs;
  };

  Law law_of(std::int64_t ell) const;  // binary-doubling convolution, cached powers of two
  void check_ell(std::int64_t ell) const;

  ChargeKind kind_ = ChargeKind::Gaussian;
  std::int64_t ell_max_ = 100000;
  double span_ = 0.0;
  std::vector<double> values_;  // lattice support, strictly increasing
  std::vector<double> probs_;
  std::vector<std::int64_t> marks_;  // values_ / span_, exact integers

  // power-of-two law cache; guarded so concurrent use gives the same values
  // as the uncached computation
  struct Cache {
    std::mutex mu;
    std::map<std::int64_t, Law> pow2;
  };
  std::shared_ptr<Cache> cache_;
};

/// Per-worker evaluation context for one (delta, beta) pair: a lazily grown
/// table of gstar values (and, on request, gradients) for ell = 0..n. For
/// lattice models the Omega_ell laws are extended by one convolution step at
/// a time, which is the cheap way to fill a contiguous table; results agree
/// with ChargeModel::gstar to rounding. Not safe for concurrent use.
class GstarTable {
 public:
  GstarTable(const ChargeModel& model, double delta, double beta);

  double delta() const { return delta_; }
  double beta() const { return beta_; }
  const ChargeModel& model() const { return *model_; }

  double at(std::int64_t ell);
  /// (gstar, d/d delta, d/d beta) at ell.
  void grad_at(std::int64_t ell, double& g, double& d_delta, double& d_beta);

  /// Ensures the table covers 0..n; throws NumericError past the model cap.
  void extend(std::int64_t n);

 private:
  const ChargeModel* model_;
  double delta_, beta_;
  bool with_grad_ = false;

  std::vector<double> g_, dd_, db_;  // indexed by ell
  // lattice sweep state
  std::int64_t cur_ell_ = 0;
  std::int64_t offset_ = 0;
  std::vector<double> probs_;

  void eval_current(std::int64_t ell);
};

}  // namespace polymer
