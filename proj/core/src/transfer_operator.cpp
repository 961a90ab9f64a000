#include "polymer/transfer_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polymer/errors.hpp"

namespace polymer {

namespace {

constexpr double kLog2 = 0.6931471805599453094;
constexpr int kMaxPowerIters = 100000;

// log i! with a growing table; thread-local so no locking
const double* log_factorial_table(std::int64_t n) {
  thread_local std::vector<double> table{0.0, 0.0};
  while (static_cast<std::int64_t>(table.size()) <= n)
    table.push_back(table.back() + std::log(static_cast<double>(table.size())));
  return table.data();
}

}  // namespace

double log_q_kernel(std::int64_t i, std::int64_t j) {
  if (i == 0) return j == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double* lf = log_factorial_table(i + j);
  // binom(i+j-1, i-1) / 2^(i+j)
  return lf[i + j - 1] - lf[i - 1] - lf[j] - static_cast<double>(i + j) * kLog2;
}

double q_kernel(std::int64_t i, std::int64_t j) {
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  return std::exp(log_q_kernel(i, j));
}

OperatorBundle build_operators(GstarTable& table, double mu, int trunc_n) {
  if (trunc_n < 2) throw ConfigError("build_operators: trunc_n must be >= 2");
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw ConfigError("build_operators: mu must be >= 0");
  const int n = trunc_n;
  table.extend(2 * static_cast<std::int64_t>(n) - 1);

  // weight exponents w(s) = gstar(s) - mu s for s = 0..2n-1; bail out early
  // on overflow instead of silently returning infinities
  std::vector<double> w(2 * static_cast<std::size_t>(n));
  for (std::int64_t s = 0; s < 2 * n; ++s) {
    w[static_cast<std::size_t>(s)] = table.at(s) - mu * static_cast<double>(s);
    if (w[static_cast<std::size_t>(s)] > 700.0)
      throw OverflowError("build_operators: entry overflow at block length " + std::to_string(s) +
                         " (exponent " + std::to_string(w[static_cast<std::size_t>(s)]) + ")");
  }

  const double* lf = log_factorial_table(2 * n);
  OperatorBundle b;
  b.trunc_n = n;
  b.mu = mu;
  b.delta = table.delta();
  b.beta = table.beta();
  b.model = &table.model();
  b.a_mat.assign(static_cast<std::size_t>(n) * n, 0.0);
  b.a_tilde_mat.assign(static_cast<std::size_t>(n) * n, 0.0);
  b.a_hat_mat.assign(static_cast<std::size_t>(n) * n, 0.0);

  // log q(i+1,j) = -log 2 + log binom(i+j, i) - (i+j) log 2, symmetric in (i,j)
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int s = i + j;
      const double lq = lf[s] - lf[i] - lf[j] - static_cast<double>(s + 1) * kLog2;
      const double a = std::exp(w[static_cast<std::size_t>(s) + 1] + lq);
      const double ahat = std::exp(w[static_cast<std::size_t>(s)] + lq);
      b.a_mat[static_cast<std::size_t>(i) * n + j] = a;
      b.a_mat[static_cast<std::size_t>(j) * n + i] = a;
      b.a_hat_mat[static_cast<std::size_t>(i) * n + j] = ahat;
      b.a_hat_mat[static_cast<std::size_t>(j) * n + i] = ahat;
    }
  }
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < n; ++j)
      b.a_tilde_mat[static_cast<std::size_t>(i) * n + j] =
          b.a_mat[static_cast<std::size_t>(i - 1) * n + j];
  return b;
}

OperatorBundle build_operators(const ChargeModel& model, double mu, double delta, double beta,
                               int trunc_n) {
  GstarTable table(model, delta, beta);
  OperatorBundle b = build_operators(table, mu, trunc_n);
  b.model = &model;
  return b;
}

namespace {

void matvec(const std::vector<double>& m, int n, const std::vector<double>& x,
            std::vector<double>& y) {
  for (int i = 0; i < n; ++i) {
    const double* row = m.data() + static_cast<std::size_t>(i) * n;
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += row[j] * x[j];
    y[i] = s;
  }
}

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// top eigenpair of a small symmetric tridiagonal (alpha diagonal, beta
// off-diagonal) by bisection on the Sturm count plus inverse iteration
double tridiag_top(const std::vector<double>& alpha, const std::vector<double>& beta,
                   std::vector<double>& y) {
  const int k = static_cast<int>(alpha.size());
  double lo = alpha[0], hi = alpha[0];
  for (int i = 0; i < k; ++i) {
    const double r = (i > 0 ? std::abs(beta[static_cast<std::size_t>(i - 1)]) : 0.0) +
                     (i + 1 < k ? std::abs(beta[static_cast<std::size_t>(i)]) : 0.0);
    lo = std::min(lo, alpha[static_cast<std::size_t>(i)] - r);
    hi = std::max(hi, alpha[static_cast<std::size_t>(i)] + r);
  }
  auto count_below = [&](double sigma) {
    int count = 0;
    double q = alpha[0] - sigma;
    if (q < 0.0) ++count;
    for (int i = 1; i < k; ++i) {
      double denom = q == 0.0 ? 1e-300 : q;
      q = (alpha[static_cast<std::size_t>(i)] - sigma) -
          beta[static_cast<std::size_t>(i - 1)] * beta[static_cast<std::size_t>(i - 1)] / denom;
      if (q < 0.0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(mid) == k)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) break;
  }
  const double top = 0.5 * (lo + hi);

  // inverse iteration on (T - sigma I), sigma just above the top eigenvalue
  const double sigma = top + std::max(1e-12, 1e-12 * std::abs(top));
  y.assign(static_cast<std::size_t>(k), 1.0);
  std::vector<double> c(static_cast<std::size_t>(k)), d(static_cast<std::size_t>(k));
  for (int pass = 0; pass < 2; ++pass) {
    d[0] = alpha[0] - sigma;
    if (k > 1) c[0] = beta[0] / d[0];
    y[0] /= d[0];
    for (int i = 1; i < k; ++i) {
      d[static_cast<std::size_t>(i)] = (alpha[static_cast<std::size_t>(i)] - sigma) -
                                       beta[static_cast<std::size_t>(i - 1)] * c[static_cast<std::size_t>(i - 1)];
      if (i + 1 < k) c[static_cast<std::size_t>(i)] = beta[static_cast<std::size_t>(i)] / d[static_cast<std::size_t>(i)];
      y[static_cast<std::size_t>(i)] =
          (y[static_cast<std::size_t>(i)] - beta[static_cast<std::size_t>(i - 1)] * y[static_cast<std::size_t>(i - 1)]) /
          d[static_cast<std::size_t>(i)];
    }
    for (int i = k - 1; i-- > 0;)
      y[static_cast<std::size_t>(i)] -= c[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(i + 1)];
    double nrm = 0.0;
    for (double v : y) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (double& v : y) v /= nrm;
  }
  return top;
}

}  // namespace

// Lanczos with full reorthogonalization from the uniform positive vector.
// The Perron root of the positive kernel is simple and dominant, but its gap
// can be small near the lattice critical regime, where plain power iteration
// stalls; Lanczos reaches the same eigenpair at the same tolerances
// (Rayleigh change < 1e-13, residual < 1e-10, relative to max(1, lambda)).
SpectralSolution spectral_radius_sym(const OperatorBundle& bundle) {
  const int n = bundle.trunc_n;
  for (double v : bundle.a_mat)
    if (!std::isfinite(v)) throw NumericError("spectral_radius_sym: non-finite matrix entry");

  std::vector<double> start(static_cast<std::size_t>(n), 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> ritz;
  double lambda = 0.0, lambda_prev = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();

  const int max_basis = std::min(n, 400);
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta, w(static_cast<std::size_t>(n)), y;

  for (int restart = 0; restart < 250; ++restart) {
    basis.clear();
    alpha.clear();
    beta.clear();
    basis.push_back(start);
    for (int k = 0; k < max_basis; ++k) {
      matvec(bundle.a_mat, n, basis.back(), w);
      double a = 0.0;
      for (int i = 0; i < n; ++i) a += basis.back()[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
      alpha.push_back(a);
      // full reorthogonalization keeps the basis numerically orthonormal
      for (const std::vector<double>& q : basis) {
        double proj = 0.0;
        for (int i = 0; i < n; ++i) proj += q[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] -= proj * q[static_cast<std::size_t>(i)];
      }
      const double b = norm2(w);
      lambda = tridiag_top(alpha, beta, y);
      const double scale = std::max(1.0, std::abs(lambda));
      residual = std::abs(b * y.back());
      const bool tight = std::abs(lambda - lambda_prev) < 1e-13 * scale && residual < 1e-10 * scale;
      lambda_prev = lambda;
      if (tight || b < 1e-300 || static_cast<int>(basis.size()) == n) {
        ritz.assign(static_cast<std::size_t>(n), 0.0);
        for (std::size_t q = 0; q < basis.size(); ++q)
          for (int i = 0; i < n; ++i)
            ritz[static_cast<std::size_t>(i)] += y[q] * basis[q][static_cast<std::size_t>(i)];
        // one forward application restores strict positivity of the Perron
        // vector and tightens the residual
        matvec(bundle.a_mat, n, ritz, w);
        const double nw = norm2(w);
        if (!(nw > 0.0) || !std::isfinite(nw))
          throw NumericError("spectral_radius_sym: iterate collapsed or overflowed");
        for (int i = 0; i < n; ++i) ritz[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / nw;
        matvec(bundle.a_mat, n, ritz, w);
        double rq = 0.0;
        for (int i = 0; i < n; ++i) rq += ritz[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        double rs = 0.0;
        for (int i = 0; i < n; ++i) {
          const double r = w[static_cast<std::size_t>(i)] - rq * ritz[static_cast<std::size_t>(i)];
          rs += r * r;
        }
        lambda = rq;
        residual = std::sqrt(rs);
        if (residual < 1e-10 * std::max(1.0, std::abs(lambda))) {
          SpectralSolution sol;
          sol.lambda = lambda;
          sol.eigvec = std::move(ritz);
          sol.trunc_n = n;
          sol.residual = residual;
          return sol;
        }
        // not converged: restart from the current Ritz vector
        start = ritz;
        break;
      }
      if (static_cast<int>(basis.size()) == max_basis) {
        // basis full: restart from the current Ritz approximation
        ritz.assign(static_cast<std::size_t>(n), 0.0);
        for (std::size_t q = 0; q < basis.size(); ++q)
          for (int i = 0; i < n; ++i)
            ritz[static_cast<std::size_t>(i)] += y[q] * basis[q][static_cast<std::size_t>(i)];
        const double nr = norm2(ritz);
        for (double& v : ritz) v /= nr;
        start = ritz;
        break;
      }
      beta.push_back(b);
      std::vector<double> next(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) next[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] / b;
      basis.push_back(std::move(next));
    }
  }
  throw NumericError("spectral_radius_sym: no convergence after restarts, last residual " +
                     std::to_string(residual));
}

double spectral_radius_nonsym(const OperatorBundle& bundle) {
  const int n = bundle.trunc_n;
  for (double v : bundle.a_tilde_mat)
    if (!std::isfinite(v)) throw NumericError("spectral_radius_nonsym: non-finite matrix entry");

  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  for (int i = 1; i < n; ++i) u[static_cast<std::size_t>(i)] = 1.0;
  {
    const double nu = norm2(u);
    for (double& x : u) x /= nu;
  }
  std::vector<double> v(static_cast<std::size_t>(n));

  double lambda = 0.0, lambda_prev = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < kMaxPowerIters; ++iter) {
    matvec(bundle.a_tilde_mat, n, u, v);
    lambda = norm2(v);
    double rs = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = v[static_cast<std::size_t>(i)] - lambda * u[static_cast<std::size_t>(i)];
      rs += r * r;
    }
    residual = std::sqrt(rs);
    const double scale = std::max(1.0, std::abs(lambda));
    if (std::abs(lambda - lambda_prev) < 1e-13 * scale && residual < 1e-10 * scale) return lambda;
    lambda_prev = lambda;
    if (!(lambda > 0.0)) return 0.0;  // kernel annihilated the start vector
    for (int i = 0; i < n; ++i) u[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] / lambda;
  }
  throw NumericError("spectral_radius_nonsym: no convergence after " +
                     std::to_string(kMaxPowerIters) + " iterations, last residual " +
                     std::to_string(residual));
}

SpectralSolution lambda_adaptive(GstarTable& table, double mu, double rel_tol, int n_start,
                                 int n_cap) {
  SpectralSolution prev;
  bool have_prev = false;
  for (int n = n_start; n <= n_cap; n *= 2) {
    OperatorBundle b = build_operators(table, mu, n);
    SpectralSolution sol = spectral_radius_sym(b);
    if (have_prev) {
      sol.trunc_gap = std::abs(sol.lambda - prev.lambda);
      if (sol.trunc_gap <= rel_tol * std::abs(sol.lambda)) return sol;
    }
    prev = std::move(sol);
    have_prev = true;
  }
  throw NumericError("lambda_adaptive: truncation cap " + std::to_string(n_cap) +
                     " reached, last gap " + std::to_string(prev.trunc_gap) + ", lambda " +
                     std::to_string(prev.lambda));
}

SpectralSolution lambda_adaptive(const ChargeModel& model, double mu, double delta, double beta,
                                 double rel_tol) {
  GstarTable table(model, delta, beta);
  return lambda_adaptive(table, mu, rel_tol);
}

double lambda_tilde_adaptive(GstarTable& table, double mu, double rel_tol, int n_start,
                             int n_cap) {
  double prev = 0.0;
  bool have_prev = false;
  for (int n = n_start; n <= n_cap; n *= 2) {
    OperatorBundle b = build_operators(table, mu, n);
    const double lt = spectral_radius_nonsym(b);
    if (have_prev && std::abs(lt - prev) <= rel_tol * std::max(std::abs(lt), 1e-300)) return lt;
    prev = lt;
    have_prev = true;
  }
  throw NumericError("lambda_tilde_adaptive: truncation cap " + std::to_string(n_cap) +
                     " reached");
}

LambdaDerivs dlambda(const OperatorBundle& bundle, const SpectralSolution& solution) {
  if (solution.trunc_n != bundle.trunc_n)
    throw ConfigError("dlambda: solution and bundle truncations differ");
  const int n = bundle.trunc_n;
  GstarTable table(*bundle.model, bundle.delta, bundle.beta);
  table.extend(2 * static_cast<std::int64_t>(n) - 1);

  std::vector<double> gd(2 * static_cast<std::size_t>(n)), gb(2 * static_cast<std::size_t>(n));
  for (std::int64_t s = 1; s < 2 * n; ++s) {
    double g, dd, db;
    table.grad_at(s, g, dd, db);
    gd[static_cast<std::size_t>(s)] = dd;
    gb[static_cast<std::size_t>(s)] = db;
  }

  const std::vector<double>& nu = solution.eigvec;
  double s_mu = 0.0, s_delta = 0.0, s_beta = 0.0;
  for (int i = 0; i < n; ++i) {
    const double* row = bundle.a_mat.data() + static_cast<std::size_t>(i) * n;
    double r_mu = 0.0, r_delta = 0.0, r_beta = 0.0;
    for (int j = 0; j < n; ++j) {
      const double w = row[j] * nu[static_cast<std::size_t>(j)];
      const std::size_t s = static_cast<std::size_t>(i + j + 1);
      r_mu += static_cast<double>(s) * w;
      r_delta += gd[s] * w;
      r_beta += gb[s] * w;
    }
    s_mu += nu[static_cast<std::size_t>(i)] * r_mu;
    s_delta += nu[static_cast<std::size_t>(i)] * r_delta;
    s_beta += nu[static_cast<std::size_t>(i)] * r_beta;
  }
  return {-s_mu, s_delta, s_beta};
}

}  // namespace polymer
