#pragma once

#include <string>
#include <utility>

#include "polymer/phase_diagram.hpp"

namespace polymer {

/// LLN speed v(delta,beta): 1/v = -d/dmu log lambda at mu = mu(delta,beta);
/// 0 in the subballistic phase; right-derivative at mu = 0 on the critical
/// curve (the phase transition is first order, so v jumps there).
double speed(const ChargeModel& model, double delta, double beta, const SolveOptions& opts = {});

/// LLN charge rho(delta,beta) = d mu / d delta, evaluated as the
/// Hellmann-Feynman ratio at mu(delta,beta); 0 in the subballistic phase.
double charge_density(const ChargeModel& model, double delta, double beta,
                      const SolveOptions& opts = {});

struct VarianceDetail {
  double sigma_v2 = 0.0;        // v^3 d^2/dmu^2 log lambda at the root
  double sigma_v2_gamma = 0.0;  // independent route: d^2/dgamma^2 of mu(delta,beta,gamma)
  double sigma_rho2 = 0.0;      // d^2/ddelta^2 of mu = d rho / d delta
};

/// CLT variances, defined in the interior of the ballistic phase
/// (beta < beta_c(delta) * (1 - 1e-3)); throws DomainError outside. Second
/// derivatives are central differences of Hellmann-Feynman first derivatives
/// with Richardson extrapolation, at a fixed truncation with roots polished
/// by Newton steps so the truncation bias cancels in the differences.
/// beta_c_hint skips the interior check's critical-curve solve when the
/// caller already knows beta_c(delta); pass a negative value otherwise.
VarianceDetail variances_detail(const ChargeModel& model, double delta, double beta,
                                const SolveOptions& opts = {}, double beta_c_hint = -1.0);
std::pair<double, double> variances(const ChargeModel& model, double delta, double beta,
                                    const SolveOptions& opts = {});

/// Flat-piece endpoints of the two rate functions:
///   1/v_tilde = [-d/dmu log lambda] at mu = mu_tilde(delta,beta),
///   rho_tilde = rho(delta_c(beta), beta).
/// Both are strictly positive throughout the interior of the quadrant.
std::pair<double, double> tilde_endpoints(const ChargeModel& model, double delta, double beta,
                                          const SolveOptions& opts = {});

/// First-order slope of the excess free energy at the critical curve:
/// K_delta = [d_beta log lambda / d_mu log lambda] at (beta_c(delta), mu=0).
double critical_slope(const ChargeModel& model, double delta, const SolveOptions& opts = {});

struct ObservableSet {
  double v = 0.0;
  double rho = 0.0;
  double sigma_v2 = 0.0;
  double sigma_rho2 = 0.0;
  double v_tilde = 0.0;
  double rho_tilde = 0.0;
  std::string method_notes;
};

/// Convenience bundle for reporting; variances are NaN outside the interior
/// of the ballistic phase.
ObservableSet observable_set(const ChargeModel& model, double delta, double beta,
                             const SolveOptions& opts = {});

}  // namespace polymer
