#include "polymer/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "polymer/phase_diagram.hpp"

namespace polymer {

namespace {

constexpr int kEnumCap = 22;
constexpr int kCrossingCap = 14;
constexpr int kSeriesCap = 16;

// ------------------------------------------------------------------ walks

struct PathEnumerator {
  int n;
  Restriction restriction;
  std::vector<double> g;       // gstar(ell), ell = 0..n
  std::vector<int> local;      // local times, site x at index x + n
  double weight = 0.0;         // running sum of gstar(L(x))
  double z = 0.0;
  std::uint64_t counted = 0;

  PathEnumerator(const ChargeModel& model, double delta, double beta, int n_, Restriction r)
      : n(n_), restriction(r), local(2 * static_cast<std::size_t>(n_) + 1, 0) {
    GstarTable table(model, delta, beta);
    g.resize(static_cast<std::size_t>(n) + 1);
    for (int ell = 0; ell <= n; ++ell) g[static_cast<std::size_t>(ell)] = table.at(ell);
  }

  void run() { dfs(0, 0, 0); }

  void dfs(int depth, int pos, int run_max) {
    if (depth == n) {
      if (restriction == Restriction::Bridge && (pos < 1 || pos < run_max)) return;
      if (restriction == Restriction::Loop && pos != 0) return;
      z += std::exp(weight);
      ++counted;
      return;
    }
    for (int step : {+1, -1}) {
      const int next = pos + step;
      if (restriction == Restriction::Bridge && next < 1) continue;
      if (restriction == Restriction::Loop && next < 0) continue;
      const std::size_t idx = static_cast<std::size_t>(next + n);
      const int ell = ++local[idx];
      weight += g[static_cast<std::size_t>(ell)] - g[static_cast<std::size_t>(ell - 1)];
      dfs(depth + 1, next, depth + 1 < n ? std::max(run_max, next) : run_max);
      weight -= g[static_cast<std::size_t>(ell)] - g[static_cast<std::size_t>(ell - 1)];
      --local[idx];
    }
  }
};

std::vector<int> trim_zeros(std::vector<int> v) {
  while (!v.empty() && v.back() == 0) v.pop_back();
  return v;
}

double log_binomial(int n, int k) {
  double s = 0.0;
  for (int i = 1; i <= k; ++i)
    s += std::log(static_cast<double>(n - k + i)) - std::log(static_cast<double>(i));
  return s;
}

// ----------------------------------------------------------------- series

using Poly = std::vector<double>;  // coefficients 0..n_max

Poly poly_mul(const Poly& a, const Poly& b, int n_max) {
  Poly out(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int i = 0; i <= n_max; ++i) {
    if (a[static_cast<std::size_t>(i)] == 0.0) continue;
    for (int j = 0; i + j <= n_max; ++j)
      out[static_cast<std::size_t>(i + j)] +=
          a[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)];
  }
  return out;
}

struct PolyMat {
  int n = 0;       // matrix dimension
  int n_max = 0;   // truncation degree
  std::vector<Poly> e;

  PolyMat(int n_, int n_max_) : n(n_), n_max(n_max_) {
    e.assign(static_cast<std::size_t>(n) * n, Poly(static_cast<std::size_t>(n_max) + 1, 0.0));
  }
  Poly& at(int i, int j) { return e[static_cast<std::size_t>(i) * n + j]; }
  const Poly& at(int i, int j) const { return e[static_cast<std::size_t>(i) * n + j]; }

  static PolyMat identity(int n_, int n_max_) {
    PolyMat m(n_, n_max_);
    for (int i = 0; i < n_; ++i) m.at(i, i)[0] = 1.0;
    return m;
  }

  bool is_zero() const {
    for (const Poly& p : e)
      for (double c : p)
        if (c != 0.0) return false;
    return true;
  }

  PolyMat operator*(const PolyMat& o) const {
    PolyMat out(n, n_max);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) {
        const Poly& aik = at(i, k);
        bool any = false;
        for (double c : aik)
          if (c != 0.0) {
            any = true;
            break;
          }
        if (!any) continue;
        for (int j = 0; j < n; ++j) {
          const Poly p = poly_mul(aik, o.at(k, j), n_max);
          Poly& dst = out.at(i, j);
          for (std::size_t t = 0; t < p.size(); ++t) dst[t] += p[t];
        }
      }
    return out;
  }

  PolyMat& operator+=(const PolyMat& o) {
    for (std::size_t k = 0; k < e.size(); ++k)
      for (std::size_t t = 0; t < e[k].size(); ++t) e[k][t] += o.e[k][t];
    return *this;
  }

  PolyMat transpose() const {
    PolyMat out(n, n_max);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.at(i, j) = at(j, i);
    return out;
  }
};

// geometric series sum_{k>=0} M^k; every factor has positive minimum degree,
// so powers past n_max vanish identically
PolyMat geometric(const PolyMat& m) {
  PolyMat acc = PolyMat::identity(m.n, m.n_max);
  PolyMat p = PolyMat::identity(m.n, m.n_max);
  for (int k = 1; k <= m.n_max; ++k) {
    p = p * m;
    if (p.is_zero()) break;
    acc += p;
  }
  return acc;
}

}  // namespace

EnumerationReport enumerate_partition(const ChargeModel& model, double delta, double beta, int n,
                                      Restriction restriction) {
  if (n < 0 || n > kEnumCap)
    throw ConfigError("enumerate_partition: n must lie in [0, " + std::to_string(kEnumCap) + "]");
  EnumerationReport rep;
  rep.n = n;
  rep.restriction = restriction;
  rep.delta = delta;
  rep.beta = beta;
  rep.paths_total = std::uint64_t{1} << n;
  if (n == 0) {
    rep.z_star = 1.0;
    rep.paths_counted = 1;
    return rep;
  }
  PathEnumerator e(model, delta, beta, n, restriction);
  e.run();
  rep.z_star = e.z / static_cast<double>(rep.paths_total);
  rep.paths_counted = e.counted;
  return rep;
}

CrossingLaw edge_crossing_law(int n) {
  if (n < 1 || n > kCrossingCap)
    throw ConfigError("edge_crossing_law: n must lie in [1, " + std::to_string(kCrossingCap) + "]");

  CrossingLaw law;
  law.n = n;
  const double p_path = std::ldexp(1.0, -n);
  std::vector<int> pos(static_cast<std::size_t>(n) + 1, 0);

  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    for (int k = 0; k < n; ++k)
      pos[static_cast<std::size_t>(k) + 1] =
          pos[static_cast<std::size_t>(k)] + ((mask >> k) & 1 ? 1 : -1);
    const int sign = pos[static_cast<std::size_t>(n)] < 0 ? -1 : 1;

    CrossingKey key;
    key.x = sign * pos[static_cast<std::size_t>(n)];
    std::vector<int> up(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> down(static_cast<std::size_t>(n) + 1, 0);
    for (int k = 0; k < n; ++k) {
      const int a = sign * pos[static_cast<std::size_t>(k)];
      const int b = sign * pos[static_cast<std::size_t>(k) + 1];
      const int e = std::min(a, b);  // edge {e, e+1}
      if (e >= 0)
        ++up[static_cast<std::size_t>(e)];
      else
        ++down[static_cast<std::size_t>(-e - 1)];
      if (b == 0) ++key.ell;  // visit to the origin at time k+1
    }
    for (int& c : up) c /= 2;    // completed upward crossings only
    for (int& c : down) c /= 2;
    key.m_plus = trim_zeros(up);
    key.m_minus = trim_zeros(down);

    law.prob[key] += p_path;
    ++law.count[key];
  }
  return law;
}

double branching_law(int ell, int x, const std::vector<int>& m_plus,
                     const std::vector<int>& m_minus) {
  if (ell < 0 || x < 0) return 0.0;
  const int m0p = m_plus.empty() ? 0 : m_plus.front();
  const int m0m = m_minus.empty() ? 0 : m_minus.front();
  if (m0p + m0m != ell) return 0.0;

  auto at = [](const std::vector<int>& v, int y) {
    return y < static_cast<int>(v.size()) ? v[static_cast<std::size_t>(y)] : 0;
  };
  const int y_end = std::max({static_cast<int>(m_plus.size()), static_cast<int>(m_minus.size()),
                              x}) + 1;

  double logp = log_binomial(ell, m0p) - ell * std::log(2.0);  // fair-coin split
  for (int y = 0; y < y_end; ++y) {
    const int ip = at(m_plus, y) + (y < x ? 1 : 0);  // immigration below level x
    logp += log_q_kernel(ip, at(m_plus, y + 1));
    logp += log_q_kernel(at(m_minus, y), at(m_minus, y + 1));
    if (!std::isfinite(logp)) return 0.0;
  }
  return std::exp(logp);
}

double ray_knight_distance(int n) {
  const CrossingLaw law = edge_crossing_law(n);
  double l1 = 0.0;
  double matched_mass = 0.0;
  for (const auto& [key, p] : law.prob) {
    const double mult = key.x > 0 ? 2.0 : 1.0;  // endpoint +x and its reflection
    const double q = mult * branching_law(key.ell, key.x, key.m_plus, key.m_minus);
    l1 += std::abs(p - q);
    matched_mass += q;
  }
  // branching outcomes off the enumerated support, if any, show up as the
  // mass defect: both laws total exactly 1 with the endpoint multiplicity
  l1 += std::abs(1.0 - matched_mass);
  return l1;
}

std::vector<double> series_coefficients(const ChargeModel& model, double delta, double beta,
                                        int n_max, SeriesKind kind) {
  if (n_max < 1 || n_max > kSeriesCap)
    throw ConfigError("series_coefficients: n_max must lie in [1, " + std::to_string(kSeriesCap) +
                      "]");
  const int dim = n_max + 1;  // higher indices only enter beyond degree n_max

  GstarTable table(model, delta, beta);
  std::vector<double> eg(2 * static_cast<std::size_t>(dim) + 1);
  for (std::int64_t s = 0; s <= 2 * dim; ++s) eg[static_cast<std::size_t>(s)] = std::exp(table.at(s));

  PolyMat a(dim, n_max), a_tilde(dim, n_max), a_hat(dim, n_max);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      const int s = i + j;
      const double q = q_kernel(i + 1, j);
      if (s + 1 <= n_max) a.at(i, j)[static_cast<std::size_t>(s + 1)] = eg[static_cast<std::size_t>(s + 1)] * q;
      if (s <= n_max) {
        a_hat.at(i, j)[static_cast<std::size_t>(s)] = eg[static_cast<std::size_t>(s)] * q;
        if (i >= 1) a_tilde.at(i, j)[static_cast<std::size_t>(s)] = eg[static_cast<std::size_t>(s)] * q_kernel(i, j);
      }
    }

  Poly out;
  if (kind == SeriesKind::Bridge) {
    out = (a * geometric(a)).at(0, 0);
  } else if (kind == SeriesKind::Loop) {
    Poly p = (a_hat * geometric(a_tilde)).at(0, 0);
    for (double& c : p) c *= 2.0;
    out = p;
  } else {
    PolyMat one = PolyMat::identity(dim, n_max);
    PolyMat mid = one;
    mid += a;  // 1 + A
    PolyMat full = geometric(a_tilde.transpose()) * a_hat * mid * geometric(a) * geometric(a_tilde);
    out = full.at(0, 0);
  }
  return out;
}

ChainStats simulate_chain(const ChargeModel& model, double delta, double beta, std::int64_t steps,
                          std::uint64_t seed) {
  if (steps < 2000) throw ConfigError("simulate_chain: need at least 2000 steps");
  RootResult root = mu_of(model, delta, beta);
  if (!(root.value > 0.0))
    throw DomainError("simulate_chain: point is not in the ballistic phase");

  GstarTable table(model, delta, beta);
  int n = root.trunc_n;
  std::vector<double> cdf;  // row-wise cumulative transition probabilities
  std::vector<double> pi;   // invariant law nu^2
  for (;; n *= 2) {
    if (n > 4096)
      throw NumericError("simulate_chain: truncation cap reached while renormalizing rows");
    OperatorBundle b = build_operators(table, root.value, n);
    SpectralSolution s = spectral_radius_sym(b);
    const std::vector<double>& nu = s.eigvec;

    // rows of the tilted kernel a(i,j) nu(j) / nu(i) must be stochastic up to
    // truncation; renormalize, but only if the occupancy-weighted defect is
    // small (far tail rows are truncated hard but never visited)
    std::vector<double> rowsum(static_cast<std::size_t>(n), 0.0);
    double defect = 0.0;
    for (int i = 0; i < n; ++i) {
      double rs = 0.0;
      for (int j = 0; j < n; ++j)
        rs += b.a(i, j) * nu[static_cast<std::size_t>(j)] / nu[static_cast<std::size_t>(i)];
      rowsum[static_cast<std::size_t>(i)] = rs;
      defect += nu[static_cast<std::size_t>(i)] * nu[static_cast<std::size_t>(i)] * std::abs(rs - 1.0);
    }
    if (defect >= 1e-8) continue;

    cdf.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) {
        acc += b.a(i, j) * nu[static_cast<std::size_t>(j)] /
               (nu[static_cast<std::size_t>(i)] * rowsum[static_cast<std::size_t>(i)]);
        cdf[static_cast<std::size_t>(i) * n + j] = acc;
      }
      cdf[static_cast<std::size_t>(i) * n + (n - 1)] = 1.0;
    }
    pi.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      pi[static_cast<std::size_t>(i)] = nu[static_cast<std::size_t>(i)] * nu[static_cast<std::size_t>(i)];
    break;
  }

  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto sample_cdf = [](const double* row, int len, double u) {
    return static_cast<int>(std::upper_bound(row, row + len, u) - row);
  };

  // initial state from the invariant law
  std::vector<double> pi_cdf(pi.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    acc += pi[i];
    pi_cdf[i] = acc;
  }
  pi_cdf.back() = 1.0;
  int state = sample_cdf(pi_cdf.data(), n, uniform());

  const std::int64_t block = 1000;
  const std::int64_t nblocks = steps / block;
  std::vector<double> block_means;
  block_means.reserve(static_cast<std::size_t>(nblocks));
  double total = 0.0, bsum = 0.0;
  std::int64_t in_block = 0;
  for (std::int64_t t = 0; t < steps; ++t) {
    const double y = 2.0 * state + 1.0;
    total += y;
    bsum += y;
    if (++in_block == block) {
      block_means.push_back(bsum / static_cast<double>(block));
      bsum = 0.0;
      in_block = 0;
    }
    state = sample_cdf(cdf.data() + static_cast<std::size_t>(state) * n, n, uniform());
  }

  ChainStats st;
  st.trunc_n = n;
  st.mean_y = total / static_cast<double>(steps);
  double bvar = 0.0;
  for (double m : block_means) bvar += (m - st.mean_y) * (m - st.mean_y);
  bvar /= static_cast<double>(block_means.size() - 1);
  st.var_y = static_cast<double>(block) * bvar;  // asymptotic per-step variance
  st.std_err = std::sqrt(st.var_y / static_cast<double>(steps));
  return st;
}

}  // namespace polymer
