#include "polymer/phase_diagram.hpp"

#include <cmath>
#include <limits>

namespace polymer {

namespace {

constexpr int kMaxDoublings = 60;
constexpr int kMaxBisections = 200;
constexpr double kCriticalBand = 1e-8;

// Evaluation of the spectral radius against a comparison level. Truncation
// is monotone for positive kernels (lambda_N increases with N), so any
// truncated value above the level already decides the sign without waiting
// for the adaptive gap to close; "above by bound" evaluations carry a lower
// bound, not a converged value, and must never be accepted as the root.
struct LevelEval {
  bool above = false;
  bool converged = false;
  double value = 0.0;
  int trunc_n = 0;
};

template <bool Tilde>
LevelEval eval_vs_level(GstarTable& table, double mu, double level, const SolveOptions& opts) {
  try {
    if (opts.n_fixed > 0) {
      OperatorBundle b = build_operators(table, mu, opts.n_fixed);
      const double v = Tilde ? spectral_radius_nonsym(b) : spectral_radius_sym(b).lambda;
      return {v > level, true, v, opts.n_fixed};
    }
    double prev = 0.0;
    bool have_prev = false;
    for (int n = 64; n <= opts.n_cap; n *= 2) {
      OperatorBundle b = build_operators(table, mu, n);
      const double v = Tilde ? spectral_radius_nonsym(b) : spectral_radius_sym(b).lambda;
      if (v > level && std::abs(v - level) > opts.lambda_rel_tol * std::abs(v))
        return {true, false, v, n};
      if (have_prev && std::abs(v - prev) <= opts.lambda_rel_tol * std::abs(v))
        return {v > level, true, v, n};
      prev = v;
      have_prev = true;
    }
    throw NumericError("spectral radius: truncation cap " + std::to_string(opts.n_cap) +
                       " reached below the comparison level");
  } catch (const OverflowError&) {
    return {true, false, std::numeric_limits<double>::infinity(), 0};
  }
}

template <bool Tilde>
RootResult solve_mu_decreasing(GstarTable& table, double level, double tol,
                               const SolveOptions& opts) {
  LevelEval l0 = eval_vs_level<Tilde>(table, 0.0, level, opts);
  if (!l0.above) return {0.0, 0.0, l0.trunc_n};

  double lo = 0.0, hi = 1.0;
  LevelEval lhi = eval_vs_level<Tilde>(table, hi, level, opts);
  int doublings = 0;
  while (lhi.above) {
    lo = hi;
    hi *= 2.0;
    if (++doublings > kMaxDoublings)
      throw NumericError("mu bracket expansion failed after 60 doublings");
    lhi = eval_vs_level<Tilde>(table, hi, level, opts);
  }

  RootResult best{hi, std::abs(lhi.value - level), lhi.trunc_n};
  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    LevelEval lm = eval_vs_level<Tilde>(table, mid, level, opts);
    if (lm.converged) {
      const double r = std::abs(lm.value - level);
      if (r < best.residual) best = {mid, r, lm.trunc_n};
      if (r <= tol) return best;
    }
    if (lm.above)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
  }
  if (best.residual <= tol) return best;
  throw NumericError("mu bisection stalled: best residual " + std::to_string(best.residual));
}

}  // namespace

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Ballistic: return "ballistic";
    case Regime::Subballistic: return "subballistic";
    case Regime::Critical: return "critical";
  }
  return "?";
}

RootResult mu_level(GstarTable& table, double level, double tol, const SolveOptions& opts) {
  return solve_mu_decreasing<false>(table, level, tol, opts);
}

RootResult mu_level(const ChargeModel& model, double delta, double beta, double level, double tol,
                    const SolveOptions& opts) {
  GstarTable table(model, delta, beta);
  return mu_level(table, level, tol, opts);
}

RootResult mu_of(const ChargeModel& model, double delta, double beta, double tol,
                 const SolveOptions& opts) {
  if (!(beta > 0.0)) throw ConfigError("mu_of: beta must be > 0");
  return mu_level(model, delta, beta, 1.0, tol, opts);
}

RootResult mu_tilde_of(GstarTable& table, double tol, const SolveOptions& opts) {
  return solve_mu_decreasing<true>(table, 1.0, tol, opts);
}

RootResult mu_tilde_of(const ChargeModel& model, double delta, double beta, double tol,
                       const SolveOptions& opts) {
  if (!(beta > 0.0)) throw ConfigError("mu_tilde_of: beta must be > 0");
  GstarTable table(model, delta, beta);
  return mu_tilde_of(table, tol, opts);
}

RootResult beta_critical(const ChargeModel& model, double delta, double tol,
                         const SolveOptions& opts) {
  if (!(delta > 0.0)) throw ConfigError("beta_critical: delta must be > 0");

  auto eval = [&](double beta) {
    GstarTable table(model, delta, beta);
    return eval_vs_level<false>(table, 0.0, 1.0, opts);
  };

  // lambda_{delta,beta}(0) is strictly decreasing in beta
  double lo, hi;
  LevelEval l1 = eval(1.0);
  if (l1.above) {
    lo = 1.0;
    hi = 2.0;
    int steps = 0;
    while (eval(hi).above) {
      lo = hi;
      hi *= 2.0;
      if (++steps > kMaxDoublings) throw NumericError("beta_critical: bracket expansion failed");
    }
  } else {
    hi = 1.0;
    lo = 0.5;
    int steps = 0;
    while (!eval(lo).above) {
      hi = lo;
      lo *= 0.5;
      if (++steps > kMaxDoublings) throw NumericError("beta_critical: bracket contraction failed");
    }
  }

  RootResult best{hi, std::numeric_limits<double>::infinity(), 0};
  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    LevelEval lm = eval(mid);
    if (lm.converged) {
      const double r = std::abs(lm.value - 1.0);
      if (r < best.residual) best = {mid, r, lm.trunc_n};
      if (r <= tol) return best;
    }
    if (lm.above)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
  }
  if (best.residual <= tol) return best;
  throw NumericError("beta_critical: bisection stalled, best residual " +
                     std::to_string(best.residual));
}

double delta_critical(const ChargeModel& model, double beta, double tol,
                      const SolveOptions& opts) {
  if (!(beta > 0.0)) throw ConfigError("delta_critical: beta must be > 0");

  auto eval = [&](double delta) {
    GstarTable table(model, delta, beta);
    return eval_vs_level<false>(table, 0.0, 1.0, opts);
  };

  // lambda_{delta,beta}(0) - 1 changes sign exactly at delta_c(beta)
  double lo = 0.0, hi = 1.0;
  int steps = 0;
  while (!eval(hi).above) {
    lo = hi;
    hi *= 2.0;
    if (++steps > kMaxDoublings) throw NumericError("delta_critical: bracket expansion failed");
  }

  double best = hi;
  double best_res = std::numeric_limits<double>::infinity();
  for (int it = 0; it < kMaxBisections; ++it) {
    const double mid = 0.5 * (lo + hi);
    LevelEval lm = eval(mid);
    if (lm.converged) {
      const double r = std::abs(lm.value - 1.0);
      if (r < best_res) {
        best = mid;
        best_res = r;
      }
      if (r <= tol) return best;
    }
    if (lm.above)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
  }
  if (best_res <= tol) return best;
  throw NumericError("delta_critical: bisection stalled, best residual " +
                     std::to_string(best_res));
}

PhasePoint phase_point_with_betac(const ChargeModel& model, double delta, double beta,
                                  double beta_c, const SolveOptions& opts) {
  if (!(beta > 0.0) || delta < 0.0) throw ConfigError("phase_point: need delta >= 0, beta > 0");

  GstarTable table(model, delta, beta);
  RootResult mu = mu_level(table, 1.0, 1e-10, opts);
  RootResult mu_t = mu_tilde_of(table, 1e-10, opts);

  PhasePoint p;
  p.delta = delta;
  p.beta = beta;
  p.mu = mu.value;
  p.mu_tilde = mu_t.value;
  p.f_excess = mu.value;
  p.f_total = mu.value + model.tilt_stats(delta).f;
  p.residual = std::max(mu.residual, mu_t.residual);
  p.trunc_n = std::max(mu.trunc_n, mu_t.trunc_n);
  if (std::abs(beta - beta_c) <= kCriticalBand)
    p.regime = Regime::Critical;
  else
    p.regime = mu.value > 0.0 ? Regime::Ballistic : Regime::Subballistic;
  return p;
}

PhasePoint phase_point(const ChargeModel& model, double delta, double beta,
                       const SolveOptions& opts) {
  const double beta_c = delta > 0.0 ? beta_critical(model, delta, 1e-10, opts).value : 0.0;
  return phase_point_with_betac(model, delta, beta, beta_c, opts);
}

}  // namespace polymer
