#include "polymer/rate_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace polymer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct SpeedEnv {
  double mu = 0.0, mu_tilde = 0.0;
  double gamma_c = 0.0;  // -log lambda(mu_tilde)
  double v_tilde = 0.0;
};

SpeedEnv make_speed_env(GstarTable& table, const SolveOptions& opts) {
  SpeedEnv e;
  e.mu = mu_level(table, 1.0, 1e-10, opts).value;
  e.mu_tilde = mu_tilde_of(table, 1e-10, opts).value;
  SpectralSolution s = lambda_adaptive(table, e.mu_tilde, opts.lambda_rel_tol, 64, opts.n_cap);
  OperatorBundle b = build_operators(table, e.mu_tilde, s.trunc_n);
  LambdaDerivs d = dlambda(b, s);
  e.gamma_c = -std::log(s.lambda);
  e.v_tilde = s.lambda / (-d.d_mu);
  return e;
}

// Concave objective for the speed rate function, parametrized by mu:
// h(m) = -theta log lambda(m) - max(m, mu_tilde). The supremum over gamma in
// the Legendre transform equals sup_m h(m) through gamma = -log lambda(m).
double maximize_speed_objective(GstarTable& table, const SpeedEnv& e, double theta,
                                const SolveOptions& opts) {
  auto h = [&](double m) {
    SpectralSolution s = lambda_adaptive(table, m, opts.lambda_rel_tol, 64, opts.n_cap);
    return -theta * std::log(s.lambda) - std::max(m, e.mu_tilde);
  };
  double a = 0.0;
  double c = std::max(1.0, 2.0 * e.mu);
  int guard = 0;
  while (h(c) >= h(0.5 * c)) {
    c *= 2.0;
    if (++guard > 60) throw NumericError("rate_speed: objective bracket expansion failed");
  }
  // golden-section maximization; tolerance 1e-10 on the inner variable
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = c - phi * (c - a);
  double x2 = a + phi * (c - a);
  double f1 = h(x1), f2 = h(x2);
  while (c - a > 1e-10) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + phi * (c - a);
      f2 = h(x2);
    } else {
      c = x2;
      x2 = x1;
      f2 = f1;
      x1 = c - phi * (c - a);
      f1 = h(x1);
    }
  }
  return std::max(f1, f2);
}

struct ChargeEnv {
  double mu = 0.0;
  double delta_c = 0.0;    // delta_c(beta)
  double rho_tilde = 0.0;  // rho(delta_c, beta)
};

ChargeEnv make_charge_env(const ChargeModel& model, double delta, double beta,
                          const SolveOptions& opts) {
  ChargeEnv e;
  e.mu = mu_of(model, delta, beta, 1e-10, opts).value;
  e.delta_c = delta_critical(model, beta, 1e-10, opts);
  e.rho_tilde = charge_density(model, e.delta_c, beta, opts);
  return e;
}

double rho_at_delta(const ChargeModel& model, double dprime, double beta,
                    const SolveOptions& opts) {
  return charge_density(model, dprime, beta, opts);
}

// Supremum of theta' gamma' - mu(delta+gamma', beta) for theta' beyond the
// flat piece. mu is convex increasing in delta', so the optimum solves
// rho(delta', beta) = theta'; located by safeguarded secant on the monotone
// map delta' -> rho.
double maximize_charge_objective(const ChargeModel& model, double delta, double beta,
                                 double theta_prime, const ChargeEnv& e,
                                 const SolveOptions& opts) {
  double lo = e.delta_c, flo = e.rho_tilde - theta_prime;  // < 0
  double hi = std::max(2.0 * e.delta_c, e.delta_c + 1.0);
  double fhi = rho_at_delta(model, hi, beta, opts) - theta_prime;
  int guard = 0;
  while (fhi < 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    if (++guard > 60) throw NumericError("rate_charge: bracket expansion failed");
    fhi = rho_at_delta(model, hi, beta, opts) - theta_prime;
  }
  // Illinois variant of regula falsi
  double x = hi, fx = fhi;
  for (int it = 0; it < 80 && hi - lo > 1e-7 * std::max(1.0, hi); ++it) {
    x = (lo * fhi - hi * flo) / (fhi - flo);
    if (!(x > lo) || !(x < hi)) x = 0.5 * (lo + hi);
    fx = rho_at_delta(model, x, beta, opts) - theta_prime;
    if (fx == 0.0) break;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
      fhi *= 0.5;
    } else {
      hi = x;
      fhi = fx;
      flo *= 0.5;
    }
  }
  const double dstar = x;
  const double mu_star = mu_of(model, dstar, beta, 1e-10, opts).value;
  return theta_prime * (dstar - delta) - mu_star;
}

double clamp_rate(double v) {
  if (v < -1e-8) throw NumericError("rate function evaluated negative: " + std::to_string(v));
  return std::max(v, 0.0);
}

}  // namespace

double mu_gamma(const ChargeModel& model, double delta, double beta, double gamma,
                const SolveOptions& opts) {
  return mu_level(model, delta, beta, std::exp(-gamma), 1e-10, opts).value;
}

double rate_speed(const ChargeModel& model, double delta, double beta, double theta,
                  const SolveOptions& opts) {
  if (theta < 0.0) throw ConfigError("rate_speed: theta must be >= 0");
  if (theta > 1.0) return kInf;
  GstarTable table(model, delta, beta);
  SpeedEnv e = make_speed_env(table, opts);
  if (theta <= e.v_tilde * (1.0 + 1e-12))
    return clamp_rate((e.mu - e.mu_tilde) + theta * e.gamma_c);
  return clamp_rate(e.mu + maximize_speed_objective(table, e, theta, opts));
}

double rate_charge(const ChargeModel& model, double delta, double beta, double theta_prime,
                   const SolveOptions& opts) {
  if (theta_prime < 0.0) throw ConfigError("rate_charge: theta' must be >= 0");
  if (model.is_lattice() && theta_prime > 0.99 * model.ess_sup()) return kInf;
  ChargeEnv e = make_charge_env(model, delta, beta, opts);
  if (theta_prime <= e.rho_tilde * (1.0 + 1e-12))
    return clamp_rate(e.mu - theta_prime * (delta - e.delta_c));
  return clamp_rate(e.mu + maximize_charge_objective(model, delta, beta, theta_prime, e, opts));
}

RateCurve rate_curve(const ChargeModel& model, double delta, double beta, RateKind kind,
                     const std::vector<double>& theta_grid, const SolveOptions& opts) {
  RateCurve curve;
  curve.kind = kind;
  curve.thetas = theta_grid;
  curve.values.reserve(theta_grid.size());

  if (kind == RateKind::Speed) {
    GstarTable table(model, delta, beta);
    SpeedEnv e = make_speed_env(table, opts);
    curve.flat_end = e.v_tilde;
    curve.flat_slope = e.gamma_c;
    curve.boundary_value = clamp_rate(e.mu - e.mu_tilde);
    for (double theta : theta_grid) {
      if (theta < 0.0) throw ConfigError("rate_curve: theta must be >= 0");
      if (theta > 1.0)
        curve.values.push_back(kInf);
      else if (theta <= e.v_tilde * (1.0 + 1e-12))
        curve.values.push_back(clamp_rate((e.mu - e.mu_tilde) + theta * e.gamma_c));
      else
        curve.values.push_back(clamp_rate(e.mu + maximize_speed_objective(table, e, theta, opts)));
    }
  } else {
    ChargeEnv e = make_charge_env(model, delta, beta, opts);
    curve.flat_end = e.rho_tilde;
    curve.flat_slope = e.delta_c - delta;
    curve.boundary_value = clamp_rate(e.mu);
    for (double theta : theta_grid) {
      if (theta < 0.0) throw ConfigError("rate_curve: theta' must be >= 0");
      if (model.is_lattice() && theta > 0.99 * model.ess_sup())
        curve.values.push_back(kInf);
      else if (theta <= e.rho_tilde * (1.0 + 1e-12))
        curve.values.push_back(clamp_rate(e.mu - theta * (delta - e.delta_c)));
      else
        curve.values.push_back(
            clamp_rate(e.mu + maximize_charge_objective(model, delta, beta, theta, e, opts)));
    }
  }
  return curve;
}

}  // namespace polymer
