#include "polymer/sturm_liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "polymer/errors.hpp"

namespace polymer {

namespace {

struct Tridiag {
  std::vector<double> diag;  // d_i
  std::vector<double> off;   // e_i couples i and i+1
};

// (x g')' + (2ax - 4bx^2) g on nodes x_i = (i+1/2)h with faces at i*h.
// The x=0 face coefficient vanishes (natural boundary); g = 0 beyond x_max.
Tridiag assemble(double a, double b, int m, double h) {
  Tridiag t;
  t.diag.resize(static_cast<std::size_t>(m));
  t.off.resize(static_cast<std::size_t>(m - 1));
  const double h2 = h * h;
  for (int i = 0; i < m; ++i) {
    const double x = (i + 0.5) * h;
    const double f_lo = i * h;
    const double f_hi = (i + 1) * h;
    t.diag[static_cast<std::size_t>(i)] = -(f_lo + f_hi) / h2 + 2.0 * a * x - 4.0 * b * x * x;
    if (i + 1 < m) t.off[static_cast<std::size_t>(i)] = f_hi / h2;
  }
  return t;
}

// number of eigenvalues below sigma (Sturm sequence / LDL^T inertia)
int count_below(const Tridiag& t, double sigma) {
  int count = 0;
  double q = t.diag[0] - sigma;
  if (q < 0.0) ++count;
  for (std::size_t i = 1; i < t.diag.size(); ++i) {
    double denom = q;
    if (denom == 0.0) denom = 1e-300;
    q = (t.diag[i] - sigma) - t.off[i - 1] * t.off[i - 1] / denom;
    if (q < 0.0) ++count;
  }
  return count;
}

// largest eigenvalue by bisection on the inertia count
double top_eigenvalue(const Tridiag& t) {
  const int m = static_cast<int>(t.diag.size());
  double lo = t.diag[0], hi = t.diag[0];
  for (int i = 0; i < m; ++i) {
    const double r = (i > 0 ? std::abs(t.off[static_cast<std::size_t>(i - 1)]) : 0.0) +
                     (i + 1 < m ? std::abs(t.off[static_cast<std::size_t>(i)]) : 0.0);
    lo = std::min(lo, t.diag[static_cast<std::size_t>(i)] - r);
    hi = std::max(hi, t.diag[static_cast<std::size_t>(i)] + r);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(t, mid) == m)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

// solve (T - sigma I) x = rhs, Thomas algorithm; sigma sits above the whole
// spectrum so the matrix is negative definite and elimination is stable
std::vector<double> shifted_solve(const Tridiag& t, double sigma, std::vector<double> rhs) {
  const std::size_t m = t.diag.size();
  std::vector<double> c(m), d(m);
  d[0] = t.diag[0] - sigma;
  c[0] = m > 1 ? t.off[0] / d[0] : 0.0;
  rhs[0] /= d[0];
  for (std::size_t i = 1; i < m; ++i) {
    d[i] = (t.diag[i] - sigma) - t.off[i - 1] * c[i - 1];
    if (i + 1 < m) c[i] = t.off[i] / d[i];
    rhs[i] = (rhs[i] - t.off[i - 1] * rhs[i - 1]) / d[i];
  }
  for (std::size_t i = m - 1; i-- > 0;) rhs[i] -= c[i] * rhs[i + 1];
  return rhs;
}

double trapezoid_norm(const std::vector<double>& f, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = (i == 0 || i + 1 == f.size()) ? 0.5 : 1.0;
    s += w * f[i] * f[i];
  }
  return std::sqrt(s * h);
}

}  // namespace

SLSolution chi(double a, double b, SLGrid grid) {
  if (!(b > 0.0)) throw ConfigError("chi: b must be > 0");
  if (grid.points < 500) throw ConfigError("chi: grid must have at least 500 points");
  if (!(grid.spacing() <= 0.05)) throw ConfigError("chi: grid spacing must be <= 0.05");

  const double h = grid.spacing();
  for (int attempt = 0; attempt < 7; ++attempt) {
    const int m = grid.points;
    Tridiag t = assemble(a, b, m, h);
    const double top = top_eigenvalue(t);

    // refinement gap against the half-resolution grid on the same domain
    Tridiag t_half = assemble(a, b, m / 2, 2.0 * h);
    const double top_half = top_eigenvalue(t_half);

    // ground state by inverse iteration just above the top eigenvalue
    const double sigma = top + std::max(1e-10, 1e-10 * std::abs(top));
    std::vector<double> x(static_cast<std::size_t>(m), 1.0);
    for (int pass = 0; pass < 3; ++pass) {
      x = shifted_solve(t, sigma, std::move(x));
      double nrm = 0.0;
      for (double v : x) nrm += v * v;
      nrm = std::sqrt(nrm);
      for (double& v : x) v /= nrm;
    }
    double body = 0.0;
    for (double v : x) body += v;
    if (body < 0.0)
      for (double& v : x) v = -v;
    double peak = 0.0;
    for (double v : x) peak = std::max(peak, std::abs(v));
    for (double& v : x) {
      if (v < -1e-12 * peak) throw NumericError("chi: ground state came out sign-changing");
      v = std::max(v, 1e-300);
    }
    const double nrm = trapezoid_norm(x, h);
    for (double& v : x) v /= nrm;

    // mass within 5h of the right boundary decides whether the domain is big enough
    double tail = 0.0;
    for (int i = std::max(0, m - 5); i < m; ++i)
      tail += x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)] * h;
    if (tail > 1e-8) {
      grid.x_max *= 2.0;
      grid.points *= 2;  // keep the spacing
      continue;
    }

    SLSolution sol;
    sol.a = a;
    sol.b = b;
    sol.chi = top;
    sol.eigfun = std::move(x);
    sol.grid = grid;
    sol.refinement_gap = std::abs(top - top_half);
    return sol;
  }
  throw NumericError("chi: domain growth did not confine the eigenfunction (a=" +
                     std::to_string(a) + ", b=" + std::to_string(b) + ")");
}

double a_star(double b, double tol, SLGrid grid) {
  if (!(b > 0.0)) throw ConfigError("a_star: b must be > 0");
  double lo = 0.0;
  double flo = chi(lo, b, grid).chi;
  if (flo >= 0.0) throw NumericError("a_star: chi(0,b) not negative");
  double hi = 1.0;
  double fhi = chi(hi, b, grid).chi;
  int guard = 0;
  while (fhi < 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 2.0;
    if (++guard > 60) throw NumericError("a_star: bracket expansion failed");
    fhi = chi(hi, b, grid).chi;
  }
  double best = hi, best_f = std::abs(fhi);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = chi(mid, b, grid).chi;
    if (std::abs(f) < best_f) {
      best = mid;
      best_f = std::abs(f);
    }
    if (std::abs(f) <= tol) return best;
    if (f < 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-14 * std::max(1.0, hi)) break;
  }
  if (best_f <= tol) return best;
  throw NumericError("a_star: bisection stalled, |chi| = " + std::to_string(best_f));
}

ScalingConstants scaling_constants(const ChargeModel& model, double delta, SLGrid grid) {
  if (!(delta > 0.0)) throw ConfigError("scaling_constants: delta must be > 0");
  const double rho = model.tilt_stats(delta).rho_delta;
  if (!(rho > 0.0))
    throw DomainError("scaling_constants: tilted mean charge must be positive");

  ScalingConstants out{};
  out.a_delta = a_star(rho, 1e-8, grid);

  const double ha = 1e-3;
  const double dchi_da =
      (chi(out.a_delta + ha, rho, grid).chi - chi(out.a_delta - ha, rho, grid).chi) / (2.0 * ha);
  out.b_delta = 1.0 / dchi_da;

  const double hd = 1e-3;
  const double rho_p = model.tilt_stats(delta + hd).rho_delta;
  const double rho_m = model.tilt_stats(delta - hd).rho_delta;
  out.c_delta = -(a_star(rho_p, 1e-8, grid) - a_star(rho_m, 1e-8, grid)) / (2.0 * hd);
  return out;
}

}  // namespace polymer
