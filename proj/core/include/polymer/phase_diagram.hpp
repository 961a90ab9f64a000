#pragma once

#include <string>

#include "polymer/transfer_operator.hpp"

namespace polymer {

enum class Regime { Ballistic, Subballistic, Critical };
const char* regime_name(Regime r);

struct SolveOptions {
  double lambda_rel_tol = 1e-9;  // adaptive truncation tolerance
  int n_fixed = 0;               // > 0: use this truncation instead of adapting
  int n_cap = 4096;
};

struct RootResult {
  double value = 0.0;
  double residual = 0.0;  // |lambda(root) - level| at the accepted root
  int trunc_n = 0;
};

/// Root of lambda_{delta,beta}(mu) = level in mu >= 0; returns 0 when
/// lambda(0) <= level. lambda is strictly decreasing in mu, so the bracket
/// [0, mu_hi] is found by doubling mu_hi from 1 and the root by bisection to
/// |lambda - level| <= tol. Overflowing evaluations count as lambda = +inf.
RootResult mu_level(const ChargeModel& model, double delta, double beta, double level,
                    double tol = 1e-10, const SolveOptions& opts = {});
RootResult mu_level(GstarTable& table, double level, double tol = 1e-10,
                    const SolveOptions& opts = {});

/// Excess free energy root: lambda(mu) = 1.
RootResult mu_of(const ChargeModel& model, double delta, double beta, double tol = 1e-10,
                 const SolveOptions& opts = {});

/// Same for the shifted kernel: lambda_tilde(mu) = 1 when solvable, else 0.
RootResult mu_tilde_of(const ChargeModel& model, double delta, double beta, double tol = 1e-10,
                       const SolveOptions& opts = {});
RootResult mu_tilde_of(GstarTable& table, double tol = 1e-10, const SolveOptions& opts = {});

/// Critical inverse temperature: unique beta with lambda_{delta,beta}(0) = 1.
RootResult beta_critical(const ChargeModel& model, double delta, double tol = 1e-10,
                         const SolveOptions& opts = {});

/// Inverse of the critical curve: delta with beta_c(delta) = beta, found by
/// bisection on lambda_{delta,beta}(0) - 1 (increasing in delta).
double delta_critical(const ChargeModel& model, double beta, double tol = 1e-10,
                      const SolveOptions& opts = {});

struct PhasePoint {
  double delta = 0.0, beta = 0.0;
  double mu = 0.0;        // excess free energy
  double mu_tilde = 0.0;  // loop growth rate
  double f_excess = 0.0;  // = mu
  double f_total = 0.0;   // = mu + f(delta) <= 0
  Regime regime = Regime::Subballistic;
  double residual = 0.0;
  int trunc_n = 0;
};

/// Assembles free energies and the regime label. The point is labelled
/// Critical when |beta - beta_c(delta)| <= 1e-8.
PhasePoint phase_point(const ChargeModel& model, double delta, double beta,
                       const SolveOptions& opts = {});

/// Variant for grid scans with beta_c(delta) already known.
PhasePoint phase_point_with_betac(const ChargeModel& model, double delta, double beta,
                                  double beta_c, const SolveOptions& opts = {});

}  // namespace polymer
