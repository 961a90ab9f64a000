#include <doctest.h>

#include <cmath>
#include <vector>

#include "polymer/charge_model.hpp"

using namespace polymer;

namespace {

// independent oracle for the +-1 lattice: direct binomial sum over the law
// of the block charge, in log space
double binomial_gstar_pm1(long ell, double delta, double beta) {
  std::vector<double> terms;
  double lognck = 0.0;  // log C(ell, 0)
  double m = -1e308;
  for (long k = 0; k <= ell; ++k) {
    const double omega = 2.0 * k - ell;
    const double t = lognck - ell * std::log(2.0) + delta * omega - beta * omega * omega;
    terms.push_back(t);
    m = std::max(m, t);
    lognck += std::log(double(ell - k)) - std::log(double(k + 1));
  }
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

ChargeModel pm1() { return ChargeModel::lattice({-1.0, 1.0}, {0.5, 0.5}); }

}  // namespace

TEST_SUITE("charge_model") {

TEST_CASE("gstar closed form and two-point values") {
  auto g = ChargeModel::gaussian();
  CHECK(g.gstar(0, 1.0, 0.5) == 0.0);
  CHECK(g.gstar(1, 1.0, 0.5) == doctest::Approx(-0.5 * std::log(2.0) + 0.25).epsilon(1e-12));
  CHECK(pm1().gstar(1, 1.0, 0.5) ==
        doctest::Approx(-0.5 + std::log(std::cosh(1.0))).epsilon(1e-12));
}

TEST_CASE("lattice gstar against the direct binomial sum") {
  auto m = pm1();
  for (long ell : {2L, 7L, 40L}) {
    const double want = binomial_gstar_pm1(ell, 0.7, 0.3);
    CHECK(m.gstar(ell, 0.7, 0.3) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("gstar_grad closed forms and ell = 0") {
  auto g = ChargeModel::gaussian();
  auto [dd, db] = g.gstar_grad(1, 1.0, 0.5);
  CHECK(dd == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(db == doctest::Approx(-0.75).epsilon(1e-13));
  auto [d0, b0] = pm1().gstar_grad(0, 1.0, 0.5);
  CHECK(d0 == 0.0);
  CHECK(b0 == 0.0);
}

TEST_CASE("gstar_grad matches central finite differences") {
  const double h = 1e-5;
  for (const ChargeModel& m : {ChargeModel::gaussian(), pm1()}) {
    for (long ell : {1L, 5L, 30L}) {
      for (double delta : {0.3, 1.2}) {
        for (double beta : {0.2, 0.8}) {
          auto [dd, db] = m.gstar_grad(ell, delta, beta);
          const double fd_d =
              (m.gstar(ell, delta + h, beta) - m.gstar(ell, delta - h, beta)) / (2 * h);
          const double fd_b =
              (m.gstar(ell, delta, beta + h) - m.gstar(ell, delta, beta - h)) / (2 * h);
          CHECK(dd == doctest::Approx(fd_d).epsilon(1e-6));
          CHECK(db == doctest::Approx(fd_b).epsilon(1e-6));
        }
      }
    }
  }
}

TEST_CASE("tilt_stats") {
  auto g = ChargeModel::gaussian();
  auto t = g.tilt_stats(1.0);
  CHECK(t.f == doctest::Approx(-0.5).epsilon(1e-13));
  CHECK(t.rho_delta == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(t.var0 == doctest::Approx(1.0).epsilon(1e-13));

  auto tl = pm1().tilt_stats(1.0);
  CHECK(tl.f == doctest::Approx(-std::log(std::cosh(1.0))).epsilon(1e-13));
  CHECK(tl.rho_delta == doctest::Approx(std::tanh(1.0)).epsilon(1e-13));
  CHECK(tl.var0 == doctest::Approx(1.0 - std::tanh(1.0) * std::tanh(1.0)).epsilon(1e-13));

  for (const ChargeModel& m : {ChargeModel::gaussian(), pm1()}) {
    auto t0 = m.tilt_stats(0.0);
    CHECK(t0.f == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(t0.rho_delta == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(t0.var0 == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("gstar + half log ell stays bounded") {
  for (const ChargeModel& m : {ChargeModel::gaussian(), pm1()}) {
    double lo = 1e308, hi = -1e308;
    for (long ell = 1; ell <= 10000; ell = ell < 16 ? ell + 1 : ell * 5 / 4) {
      const double v = m.gstar(ell, 0.8, 0.4) + 0.5 * std::log(double(ell));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(hi - lo < 10.0);
    CHECK(std::isfinite(lo));
  }
}

TEST_CASE("monotone in beta, convex in delta") {
  const double h = 1e-3;
  for (const ChargeModel& m : {ChargeModel::gaussian(), pm1()}) {
    for (long ell : {1L, 4L, 20L}) {
      for (double delta : {0.0, 0.7, 1.5}) {
        for (double beta : {0.1, 0.5, 1.0}) {
          CHECK(m.gstar(ell, delta, beta + h) < m.gstar(ell, delta, beta));
          const double mid = m.gstar(ell, delta + h, beta);
          const double avg =
              0.5 * (m.gstar(ell, delta, beta) + m.gstar(ell, delta + 2 * h, beta));
          CHECK(mid <= avg + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("gaussian backend agrees with a discretized-normal lattice") {
  const int npts = 2000;
  const double xmax = 10.0, h = 2.0 * xmax / npts;
  std::vector<double> vals, probs;
  double z = 0.0;
  for (int k = 0; k < npts; ++k) {
    const double x = -xmax + (k + 0.5) * h;
    vals.push_back(x);
    probs.push_back(std::exp(-0.5 * x * x));
    z += probs.back();
  }
  for (double& p : probs) p /= z;
  auto lattice = ChargeModel::lattice(vals, probs, true);
  auto gauss = ChargeModel::gaussian();
  for (long ell : {1L, 2L, 5L, 13L, 34L, 89L, 200L}) {
    CHECK(std::abs(gauss.gstar(ell, 0.7, 0.3) - lattice.gstar(ell, 0.7, 0.3)) < 1e-4);
  }
}

TEST_CASE("omega law is a probability law on the span grid") {
  auto m = pm1();
  auto law = m.omega_law(9);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < law.support.size(); ++k)
    CHECK(law.support[k] < law.support[k + 1]);
  for (double p : law.probs) sum += p;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(law.support.front() == doctest::Approx(-9.0));
  CHECK(law.support.back() == doctest::Approx(9.0));
}

TEST_CASE("descriptor validation names the violated invariant") {
  CHECK_NOTHROW(ChargeModel::from_json_text(R"({"kind":"gaussian"})"));
  CHECK_NOTHROW(
      ChargeModel::from_json_text(R"({"kind":"lattice","values":[-1,1],"probs":[0.5,0.5]})"));
  CHECK_THROWS_AS(ChargeModel::from_json_text("not json"), ConfigError);
  CHECK_THROWS_AS(ChargeModel::from_json_text(R"({"kind":"exotic"})"), ConfigError);
  CHECK_THROWS_WITH_AS(
      ChargeModel::from_json_text(R"({"kind":"lattice","values":[-1,1],"probs":[0.7,0.5]})"),
      doctest::Contains("sum to 1"), ConfigError);
  CHECK_THROWS_WITH_AS(
      ChargeModel::from_json_text(R"({"kind":"lattice","values":[-1,2],"probs":[0.5,0.5]})"),
      doctest::Contains("mean"), ConfigError);
  // biased coin needs the standardize transform
  CHECK_THROWS_AS(ChargeModel::lattice({-1.0, 1.0}, {0.25, 0.75}), ConfigError);
  auto biased = ChargeModel::lattice({-1.0, 1.0}, {0.25, 0.75}, true);
  auto t = biased.tilt_stats(0.0);
  CHECK(t.rho_delta == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(t.var0 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lattice span detection") {
  auto m = ChargeModel::lattice({-2.0, 0.0, 2.0}, {0.125, 0.75, 0.125});
  CHECK(m.lattice_span() == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pm1().lattice_span() == doctest::Approx(1.0).epsilon(1e-12));
  // incommensurable support is rejected
  CHECK_THROWS_AS(
      ChargeModel::lattice({-1.0, std::sqrt(2.0) - 0.3, 1.0}, {0.4, 0.2, 0.4}, true),
      ConfigError);
}

TEST_CASE("ell cap is enforced for lattice laws") {
  auto m = pm1();
  CHECK(m.ell_max() == 20000);
  CHECK_THROWS_AS(m.gstar(20001, 0.5, 0.5), NumericError);
  CHECK(ChargeModel::gaussian().ell_max() == 100000);
}

TEST_CASE("table evaluator matches the per-call path") {
  for (const ChargeModel& m : {ChargeModel::gaussian(), pm1()}) {
    GstarTable table(m, 0.9, 0.35);
    for (long ell : {1L, 2L, 17L, 64L}) {
      CHECK(table.at(ell) == doctest::Approx(m.gstar(ell, 0.9, 0.35)).epsilon(1e-13));
      double g, dd, db;
      table.grad_at(ell, g, dd, db);
      auto [gd, gb] = m.gstar_grad(ell, 0.9, 0.35);
      CHECK(dd == doctest::Approx(gd).epsilon(1e-12));
      CHECK(db == doctest::Approx(gb).epsilon(1e-12));
    }
  }
}

}  // TEST_SUITE
