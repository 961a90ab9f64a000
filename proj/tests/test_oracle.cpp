#include <doctest.h>

#include <cmath>
#include <vector>

#include "polymer/oracle.hpp"
#include "polymer/observables.hpp"

using namespace polymer;

namespace {

double binom(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= double(n - k + i) / double(i);
  return r;
}

// allocation count of the crossing construction
double c_factor(int i, int j) {
  if (i == 0) return j == 0 ? 1.0 : 0.0;
  return binom(i + j - 1, i - 1);
}

double hand_path_count(const CrossingKey& key) {
  const int m0p = key.m_plus.empty() ? 0 : key.m_plus.front();
  auto at = [](const std::vector<int>& v, int y) {
    return y < int(v.size()) ? v[std::size_t(y)] : 0;
  };
  double count = binom(key.ell, m0p);
  const int y_end =
      std::max({int(key.m_plus.size()), int(key.m_minus.size()), key.x}) + 1;
  for (int y = 0; y < y_end; ++y) {
    count *= c_factor(at(key.m_plus, y) + (y < key.x ? 1 : 0), at(key.m_plus, y + 1));
    count *= c_factor(at(key.m_minus, y), at(key.m_minus, y + 1));
  }
  return count;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("hand-enumerated partition functions") {
  auto g = ChargeModel::gaussian();
  const double g1 = g.gstar(1, 1.0, 0.5);
  const double g2 = g.gstar(2, 1.0, 0.5);

  auto e1 = enumerate_partition(g, 1.0, 0.5, 1, Restriction::Free);
  CHECK(e1.z_star == doctest::Approx(std::exp(g1)).epsilon(1e-14));
  CHECK(e1.paths_total == 2);

  // of the 8 three-step paths, 4 leave local-time profile (1,1,1) and 4
  // leave (2,1)
  auto e3 = enumerate_partition(g, 1.0, 0.5, 3, Restriction::Free);
  CHECK(e3.z_star ==
        doctest::Approx(0.5 * std::exp(3 * g1) + 0.5 * std::exp(g1 + g2)).epsilon(1e-13));

  auto eb = enumerate_partition(g, 1.0, 0.5, 2, Restriction::Bridge);
  CHECK(eb.z_star == doctest::Approx(0.25 * std::exp(2 * g1)).epsilon(1e-14));
  CHECK(eb.paths_counted == 1);

  CHECK(enumerate_partition(g, 1.0, 0.5, 0, Restriction::Free).z_star == 1.0);
  CHECK_THROWS_AS(enumerate_partition(g, 1.0, 0.5, 23, Restriction::Free), ConfigError);
}

TEST_CASE("edge-crossing law at n = 2") {
  CrossingLaw law = edge_crossing_law(2);
  CrossingKey up_down{0, 1, {1}, {}};
  CrossingKey down_up{0, 1, {}, {1}};
  REQUIRE(law.prob.count(up_down) == 1);
  REQUIRE(law.prob.count(down_up) == 1);
  CHECK(law.prob.at(up_down) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(law.prob.at(down_up) == doctest::Approx(0.25).epsilon(1e-14));
  double total = 0.0;
  for (const auto& [k, p] : law.prob) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("total mass is one for every horizon") {
  for (int n : {3, 5, 8, 11}) {
    CrossingLaw law = edge_crossing_law(n);
    double total = 0.0;
    for (const auto& [k, p] : law.prob) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("branching probabilities") {
  CHECK(branching_law(1, 0, {1}, {}) == doctest::Approx(0.25).epsilon(1e-14));
  // rho_1(1,0) = 1/2 and the dying colony contributes q(1,0) = 1/2
  CHECK(branching_law(1, 0, {0, 1}, {}) == 0.0);  // m0+ + m0- != ell
  CHECK(branching_law(2, 0, {1}, {}) == 0.0);
  CHECK(branching_law(0, 0, {}, {}) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("crossing law equals the branching construction") {
  for (int n : {2, 4, 6, 8}) {
    CHECK(0.5 * ray_knight_distance(n) < 1e-10);
  }
}

TEST_CASE("path counts match the allocation formula") {
  for (int n : {4, 7, 10}) {
    CrossingLaw law = edge_crossing_law(n);
    for (const auto& [key, cnt] : law.count) {
      const double mult = key.x > 0 ? 2.0 : 1.0;
      CHECK(double(cnt) == doctest::Approx(mult * hand_path_count(key)).epsilon(1e-12));
    }
  }
}

TEST_CASE("bridge and loop series match enumeration exactly") {
  auto g = ChargeModel::gaussian();
  auto pm1 = ChargeModel::lattice({-1.0, 1.0}, {0.5, 0.5});
  struct Setup {
    const ChargeModel* m;
    double delta, beta;
  } setups[] = {{&g, 1.0, 0.5}, {&pm1, 0.7, 0.3}};
  for (const auto& s : setups) {
    auto cb = series_coefficients(*s.m, s.delta, s.beta, 10, SeriesKind::Bridge);
    auto cl = series_coefficients(*s.m, s.delta, s.beta, 10, SeriesKind::Loop);
    const double g1 = s.m->gstar(1, s.delta, s.beta);
    CHECK(cb[1] == doctest::Approx(0.5 * std::exp(g1)).epsilon(1e-12));
    CHECK(cb[2] == doctest::Approx(0.25 * std::exp(2 * g1)).epsilon(1e-12));
    for (int n = 0; n <= 10; ++n) {
      const double zb = enumerate_partition(*s.m, s.delta, s.beta, n, Restriction::Bridge).z_star;
      const double zl = enumerate_partition(*s.m, s.delta, s.beta, n, Restriction::Loop).z_star;
      if (n >= 1) CHECK(cb[std::size_t(n)] == doctest::Approx(zb).epsilon(1e-9));
      CHECK(cl[std::size_t(n)] == doctest::Approx(zl).epsilon(1e-9));
    }
  }
}

TEST_CASE("full series is proportional to the free partition function") {
  auto g = ChargeModel::gaussian();
  auto cf = series_coefficients(g, 1.0, 0.5, 10, SeriesKind::Full);
  double kappa = 0.0;
  for (int n = 1; n <= 10; ++n) {
    const double z = enumerate_partition(g, 1.0, 0.5, n, Restriction::Free).z_star;
    const double ratio = cf[std::size_t(n)] / z;
    if (n == 1)
      kappa = ratio;
    else
      CHECK(ratio == doctest::Approx(kappa).epsilon(1e-9));
  }
  CHECK(kappa == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("bridges are super-additive and bounded by the free energy") {
  auto g = ChargeModel::gaussian();
  std::vector<double> logz{0.0};
  for (int n = 1; n <= 16; ++n)
    logz.push_back(
        std::log(enumerate_partition(g, 1.0, 0.2, n, Restriction::Bridge).z_star));
  for (int m = 1; m < 16; ++m)
    for (int k = 1; m + k <= 16; ++k)
      CHECK(logz[std::size_t(m + k)] >= logz[std::size_t(m)] + logz[std::size_t(k)] - 1e-12);
  const double mu = mu_of(g, 1.0, 0.2).value;
  double prev = -1e300;
  for (int n : {4, 8, 16}) {
    const double rate = logz[std::size_t(n)] / n;
    CHECK(rate >= prev - 1e-12);
    CHECK(rate <= mu + 1e-6);
    prev = rate;
  }
}

TEST_CASE("tilted chain: determinism and spectral agreement") {
  auto g = ChargeModel::gaussian();
  ChainStats a = simulate_chain(g, 1.0, 0.2, 100000, 7);
  ChainStats b = simulate_chain(g, 1.0, 0.2, 100000, 7);
  CHECK(a.mean_y == b.mean_y);
  CHECK(a.var_y == b.var_y);
  CHECK(a.std_err == b.std_err);
  ChainStats c = simulate_chain(g, 1.0, 0.2, 100000, 8);
  CHECK(a.mean_y != c.mean_y);

  const double v = speed(g, 1.0, 0.2);
  CHECK(std::abs(a.mean_y - 1.0 / v) <= 3.0 * a.std_err);

  CHECK_THROWS_AS(simulate_chain(g, 1.0, 0.8, 100000, 1), DomainError);
}

}  // TEST_SUITE
