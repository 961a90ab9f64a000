#include "polymer/observables.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace polymer {

namespace {

constexpr double kCriticalLambdaBand = 1e-8;

struct Solved {
  OperatorBundle bundle;
  SpectralSolution sol;
  LambdaDerivs d;
};

Solved solve_at(GstarTable& table, double mu, int n) {
  Solved s;
  s.bundle = build_operators(table, mu, n);
  s.sol = spectral_radius_sym(s.bundle);
  s.d = dlambda(s.bundle, s.sol);
  return s;
}

// Root of lambda(mu) = level at fixed truncation, polished by Newton to
// near machine precision; the derivative comes with the eigenvector for free.
double mu_root_fixed(GstarTable& table, double level, int n, double mu_hint) {
  auto lambda_or_inf = [&](double mu) {
    try {
      return solve_at(table, mu, n).sol.lambda;
    } catch (const OverflowError&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  if (lambda_or_inf(0.0) <= level) return 0.0;

  double mu = mu_hint > 0.0 ? mu_hint : 1.0;
  double lo = 0.0, hi = mu;
  int guard = 0;
  while (lambda_or_inf(hi) >= level) {
    lo = hi;
    hi *= 2.0;
    if (++guard > 60) throw NumericError("mu_root_fixed: bracket expansion failed");
  }
  // a few bisections to localize, then Newton
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 20; ++it) {
    if (lambda_or_inf(mid) > level)
      lo = mid;
    else
      hi = mid;
    mid = 0.5 * (lo + hi);
  }
  double x = mid;
  double best_x = x, best_r = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 12; ++it) {
    Solved s = solve_at(table, x, n);
    const double r = s.sol.lambda - level;
    if (std::abs(r) < best_r) {
      best_r = std::abs(r);
      best_x = x;
    }
    if (std::abs(r) <= 1e-15 * std::max(1.0, level)) break;
    double step = r / s.d.d_mu;  // d_mu < 0
    double xn = x - step;
    if (xn < lo || xn > hi) xn = 0.5 * (lo + hi);
    if (s.sol.lambda > level)
      lo = x;
    else
      hi = x;
    x = xn;
  }
  return best_x;
}

}  // namespace

double speed(const ChargeModel& model, double delta, double beta, const SolveOptions& opts) {
  RootResult r = mu_of(model, delta, beta, 1e-10, opts);
  GstarTable table(model, delta, beta);
  if (r.value == 0.0) {
    SpectralSolution s0 = opts.n_fixed > 0
                              ? spectral_radius_sym(build_operators(table, 0.0, opts.n_fixed))
                              : lambda_adaptive(table, 0.0, opts.lambda_rel_tol, 64, opts.n_cap);
    if (s0.lambda < 1.0 - kCriticalLambdaBand) return 0.0;  // subballistic
    OperatorBundle b = build_operators(table, 0.0, s0.trunc_n);
    LambdaDerivs d = dlambda(b, s0);
    return s0.lambda / (-d.d_mu);  // right-derivative at criticality
  }
  const int n = opts.n_fixed > 0 ? opts.n_fixed : r.trunc_n;
  Solved s = solve_at(table, r.value, n);
  return s.sol.lambda / (-s.d.d_mu);
}

double charge_density(const ChargeModel& model, double delta, double beta,
                      const SolveOptions& opts) {
  RootResult r = mu_of(model, delta, beta, 1e-10, opts);
  GstarTable table(model, delta, beta);
  if (r.value == 0.0) {
    SpectralSolution s0 = opts.n_fixed > 0
                              ? spectral_radius_sym(build_operators(table, 0.0, opts.n_fixed))
                              : lambda_adaptive(table, 0.0, opts.lambda_rel_tol, 64, opts.n_cap);
    if (s0.lambda < 1.0 - kCriticalLambdaBand) return 0.0;
    OperatorBundle b = build_operators(table, 0.0, s0.trunc_n);
    LambdaDerivs d = dlambda(b, s0);
    return d.d_delta / (-d.d_mu);
  }
  const int n = opts.n_fixed > 0 ? opts.n_fixed : r.trunc_n;
  Solved s = solve_at(table, r.value, n);
  return s.d.d_delta / (-s.d.d_mu);
}

VarianceDetail variances_detail(const ChargeModel& model, double delta, double beta,
                                const SolveOptions& opts, double beta_c_hint) {
  const double bc =
      beta_c_hint > 0.0 ? beta_c_hint : beta_critical(model, delta, 1e-10, opts).value;
  if (!(beta < bc * (1.0 - 1e-3)))
    throw DomainError("variances: point is not in the interior of the ballistic phase");

  RootResult r = mu_of(model, delta, beta, 1e-10, opts);
  const int n = opts.n_fixed > 0 ? opts.n_fixed : r.trunc_n;

  GstarTable table(model, delta, beta);
  const double mu0 = mu_root_fixed(table, 1.0, n, r.value);
  Solved sc = solve_at(table, mu0, n);
  const double v = sc.sol.lambda / (-sc.d.d_mu);

  // d^2/dmu^2 log lambda by Richardson-extrapolated central differences of
  // the exact first derivative
  auto dlog_mu = [&](double mu) {
    Solved s = solve_at(table, mu, n);
    return s.d.d_mu / s.sol.lambda;
  };
  const double h1 = 1e-4 * std::max(1.0, std::abs(mu0));
  auto second_mu = [&](double h) { return (dlog_mu(mu0 + h) - dlog_mu(mu0 - h)) / (2.0 * h); };
  const double d2a = second_mu(h1);
  const double d2b = second_mu(0.5 * h1);
  const double log_lambda_pp = (4.0 * d2b - d2a) / 3.0;

  VarianceDetail out;
  out.sigma_v2 = v * v * v * log_lambda_pp;

  // independent route through the level sets: mu(gamma) solves
  // lambda(mu) = exp(-gamma)
  auto mu_of_gamma = [&](double gamma) {
    return mu_root_fixed(table, std::exp(-gamma), n, mu0);
  };
  auto second_gamma = [&](double h) {
    return (mu_of_gamma(h) - 2.0 * mu0 + mu_of_gamma(-h)) / (h * h);
  };
  const double g2a = second_gamma(1e-4);
  const double g2b = second_gamma(5e-5);
  out.sigma_v2_gamma = (4.0 * g2b - g2a) / 3.0;

  // sigma_rho^2 = d rho / d delta with rho from Hellmann-Feynman at the
  // polished root for the shifted delta
  auto rho_at = [&](double d) {
    GstarTable t(model, d, beta);
    const double mu = mu_root_fixed(t, 1.0, n, mu0);
    Solved s = solve_at(t, mu, n);
    return s.d.d_delta / (-s.d.d_mu);
  };
  const double hd = 1e-4 * std::max(1.0, std::abs(delta));
  auto drho = [&](double h) { return (rho_at(delta + h) - rho_at(delta - h)) / (2.0 * h); };
  const double r2a = drho(hd);
  const double r2b = drho(0.5 * hd);
  out.sigma_rho2 = (4.0 * r2b - r2a) / 3.0;
  return out;
}

std::pair<double, double> variances(const ChargeModel& model, double delta, double beta,
                                    const SolveOptions& opts) {
  VarianceDetail d = variances_detail(model, delta, beta, opts);
  return {d.sigma_v2, d.sigma_rho2};
}

std::pair<double, double> tilde_endpoints(const ChargeModel& model, double delta, double beta,
                                          const SolveOptions& opts) {
  if (!(delta > 0.0) || !(beta > 0.0))
    throw ConfigError("tilde_endpoints: need the interior of the quadrant");

  GstarTable table(model, delta, beta);
  RootResult mt = mu_tilde_of(table, 1e-10, opts);
  SpectralSolution s = opts.n_fixed > 0
                           ? spectral_radius_sym(build_operators(table, mt.value, opts.n_fixed))
                           : lambda_adaptive(table, mt.value, opts.lambda_rel_tol, 64, opts.n_cap);
  OperatorBundle b = build_operators(table, mt.value, s.trunc_n);
  LambdaDerivs d = dlambda(b, s);
  const double v_tilde = s.lambda / (-d.d_mu);  // lambda(mu_tilde) != 1 in general

  const double dc = delta_critical(model, beta, 1e-10, opts);
  const double rho_tilde = charge_density(model, dc, beta, opts);
  return {v_tilde, rho_tilde};
}

double critical_slope(const ChargeModel& model, double delta, const SolveOptions& opts) {
  if (!(delta > 0.0)) throw ConfigError("critical_slope: delta must be > 0");
  const double bc = beta_critical(model, delta, 1e-10, opts).value;
  GstarTable table(model, delta, bc);
  SpectralSolution s = opts.n_fixed > 0
                           ? spectral_radius_sym(build_operators(table, 0.0, opts.n_fixed))
                           : lambda_adaptive(table, 0.0, opts.lambda_rel_tol, 64, opts.n_cap);
  OperatorBundle b = build_operators(table, 0.0, s.trunc_n);
  LambdaDerivs d = dlambda(b, s);
  return d.d_beta / d.d_mu;  // both negative
}

ObservableSet observable_set(const ChargeModel& model, double delta, double beta,
                             const SolveOptions& opts) {
  ObservableSet o;
  o.v = speed(model, delta, beta, opts);
  o.rho = charge_density(model, delta, beta, opts);
  std::ostringstream notes;
  notes << "first derivatives: eigenvector (Hellmann-Feynman); second: Richardson central FD";
  try {
    VarianceDetail vd = variances_detail(model, delta, beta, opts);
    o.sigma_v2 = vd.sigma_v2;
    o.sigma_rho2 = vd.sigma_rho2;
  } catch (const DomainError&) {
    o.sigma_v2 = std::numeric_limits<double>::quiet_NaN();
    o.sigma_rho2 = std::numeric_limits<double>::quiet_NaN();
    notes << "; variances undefined outside int(B)";
  }
  if (delta > 0.0) {
    auto [vt, rt] = tilde_endpoints(model, delta, beta, opts);
    o.v_tilde = vt;
    o.rho_tilde = rt;
  } else {
    o.v_tilde = std::numeric_limits<double>::quiet_NaN();
    o.rho_tilde = std::numeric_limits<double>::quiet_NaN();
  }
  o.method_notes = notes.str();
  return o;
}

}  // namespace polymer
