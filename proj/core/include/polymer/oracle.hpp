#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "polymer/transfer_operator.hpp"

namespace polymer {

enum class Restriction { Free, Bridge, Loop };

struct EnumerationReport {
  int n = 0;
  Restriction restriction = Restriction::Free;
  double z_star = 0.0;              // excess partition function
  std::uint64_t paths_total = 0;    // 2^n
  std::uint64_t paths_counted = 0;  // paths satisfying the restriction
  double delta = 0.0, beta = 0.0;
};

/// Exact excess partition function by exhaustive walk enumeration:
/// 2^-n sum over paths of exp(sum_x gstar(L_n(x))), restricted to bridges
/// (0 < S_i <= S_n) or right loops (S_i >= 0, S_n = 0) on demand. n <= 22.
EnumerationReport enumerate_partition(const ChargeModel& model, double delta, double beta, int n,
                                      Restriction restriction);

/// Joint outcome of the crossing construction: completed upward crossings
/// above the origin, downward crossings below, visits to the origin, and the
/// endpoint. Paths ending left of the origin are reflected, so x >= 0 and the
/// probabilities over all outcomes sum to 1.
struct CrossingKey {
  int x = 0;
  int ell = 0;
  std::vector<int> m_plus, m_minus;  // trailing zeros trimmed
  auto operator<=>(const CrossingKey&) const = default;
};

struct CrossingLaw {
  int n = 0;
  std::map<CrossingKey, double> prob;
  std::map<CrossingKey, std::uint64_t> count;  // raw path counts
};

/// Exhaustive law of (M+, M-, L_0, S_n) for walk length n <= 14.
CrossingLaw edge_crossing_law(int n);

/// Two-species branching probability of the given crossing profiles:
/// fair-coin split of ell initial individuals, geometric(1/2) offspring,
/// immigration in the + population up to level x. Zero unless
/// m_plus[0] + m_minus[0] = ell.
double branching_law(int ell, int x, const std::vector<int>& m_plus,
                     const std::vector<int>& m_minus);

/// L1 distance (twice the total variation) between the enumerated crossing
/// law and the branching construction, endpoint multiplicity included.
double ray_knight_distance(int n);

enum class SeriesKind { Bridge, Loop, Full };

/// Coefficients c_0..c_n_max of the generating functions assembled from the
/// truncated-polynomial kernels at mu = 0:
///   Bridge: [A / (1-A)](0,0)
///   Loop:   [2 Ahat / (1-Atilde)](0,0)
///   Full:   [(1-Atilde^T)^-1 Ahat (1+A) (1-A)^-1 (1-Atilde)^-1](0,0)
/// Bridge and Loop match the enumerated partition functions exactly; Full is
/// proportional to them with one n-independent constant (reported by the
/// consistency checks, not fixed here).
std::vector<double> series_coefficients(const ChargeModel& model, double delta, double beta,
                                        int n_max, SeriesKind kind);

struct ChainStats {
  double mean_y = 0.0;   // mean increment 2 M+ + 1
  double var_y = 0.0;    // asymptotic per-step variance (batch means)
  double std_err = 0.0;  // standard error of mean_y
  int trunc_n = 0;
};

/// Simulates the eigenvector-tilted crossing chain at mu = mu(delta,beta)
/// (ballistic phase only) and accumulates the increments 2 M+ + 1 whose mean
/// is 1/v. Deterministic for a fixed seed.
ChainStats simulate_chain(const ChargeModel& model, double delta, double beta,
                          std::int64_t steps, std::uint64_t seed);

}  // namespace polymer
