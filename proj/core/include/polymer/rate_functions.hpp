#pragma once

#include <vector>

#include "polymer/observables.hpp"

namespace polymer {

/// Level root of the spectral radius: solves lambda_{delta,beta}(mu) =
/// exp(-gamma) in mu >= 0, returning 0 when lambda(0) < exp(-gamma).
double mu_gamma(const ChargeModel& model, double delta, double beta, double gamma,
                const SolveOptions& opts = {});

/// Rate function of the empirical speed:
///   I^v(theta) = mu + sup_gamma [theta*gamma - max(mu(gamma), mu_tilde)],
/// +infinity for theta > 1. On [0, v_tilde] the supremum sits at
/// gamma_c = -log lambda(mu_tilde) and the function is affine.
double rate_speed(const ChargeModel& model, double delta, double beta, double theta,
                  const SolveOptions& opts = {});

/// Rate function of the empirical charge:
///   I^rho(theta') = mu + sup_gamma' [theta'*gamma' - mu(delta+gamma', beta)],
/// affine with slope delta_c(beta) - delta on [0, rho_tilde]; +infinity
/// beyond the essential supremum of the charge law (evaluated only up to
/// 0.99 * ess_sup for lattice laws).
double rate_charge(const ChargeModel& model, double delta, double beta, double theta_prime,
                   const SolveOptions& opts = {});

enum class RateKind { Speed, Charge };

struct RateCurve {
  RateKind kind = RateKind::Speed;
  std::vector<double> thetas;
  std::vector<double> values;  // +infinity allowed
  double flat_end = 0.0;       // v_tilde or rho_tilde
  double flat_slope = 0.0;     // -log lambda(mu_tilde) or delta_c(beta) - delta
  double boundary_value = 0.0; // value at theta = 0
};

RateCurve rate_curve(const ChargeModel& model, double delta, double beta, RateKind kind,
                     const std::vector<double>& theta_grid, const SolveOptions& opts = {});

}  // namespace polymer
