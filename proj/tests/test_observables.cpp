#include <doctest.h>

#include <cmath>
#include <vector>

#include "polymer/observables.hpp"

using namespace polymer;

TEST_SUITE("observables") {

TEST_CASE("speed and charge vanish in the subballistic phase") {
  auto g = ChargeModel::gaussian();
  CHECK(speed(g, 1.0, 0.8) == 0.0);
  CHECK(charge_density(g, 1.0, 0.8) == 0.0);
}

TEST_CASE("speed at criticality is strictly positive (first-order transition)") {
  auto g = ChargeModel::gaussian();
  const double bc = beta_critical(g, 1.0).value;
  const double v = speed(g, 1.0, bc);
  CHECK(v > 0.05);
  CHECK(v <= 1.0);
  CHECK(charge_density(g, 1.0, bc) > 0.0);
}

TEST_CASE("speed against the simulated crossing chain is covered in the oracle suite") {
  auto g = ChargeModel::gaussian();
  const double v = speed(g, 1.0, 0.2);
  CHECK(v > 0.0);
  CHECK(v < 1.0);
}

TEST_CASE("charge equals the bias derivative of the free energy") {
  auto g = ChargeModel::gaussian();
  const double h = 1e-4;
  for (double beta : {0.1, 0.2}) {
    const double rho = charge_density(g, 1.0, beta);
    const double fd = (mu_of(g, 1.0 + h, beta).value - mu_of(g, 1.0 - h, beta).value) / (2 * h);
    CHECK(rho == doctest::Approx(fd).epsilon(1e-4));
    CHECK(rho >= 0.0);
  }
}

TEST_CASE("weak-interaction limit of the charge") {
  auto g = ChargeModel::gaussian();
  const double rho = charge_density(g, 1.0, 1e-4);
  CHECK(std::abs(rho - 1.0) < 0.05);
}

TEST_CASE("speed is not monotone in beta, charge is") {
  auto g = ChargeModel::gaussian();
  std::vector<double> vs, rs;
  for (int i = 0; i < 14; ++i) {
    const double beta = 0.01 + (0.23 - 0.01) * i / 13.0;
    vs.push_back(speed(g, 1.0, beta));
    rs.push_back(charge_density(g, 1.0, beta));
  }
  bool rises = false, falls = false;
  for (std::size_t k = 1; k < vs.size(); ++k) {
    if (vs[k] > vs[k - 1] + 1e-10) rises = true;
    if (vs[k] < vs[k - 1] - 1e-10) falls = true;
    CHECK(rs[k] < rs[k - 1] + 1e-10);
  }
  CHECK(rises);
  CHECK(falls);
}

TEST_CASE("variance self-consistency and positivity") {
  auto g = ChargeModel::gaussian();
  VarianceDetail vd = variances_detail(g, 1.0, 0.2);
  CHECK(vd.sigma_v2 > 0.0);
  CHECK(vd.sigma_rho2 > 0.0);
  CHECK(vd.sigma_v2 ==
        doctest::Approx(vd.sigma_v2_gamma).epsilon(1e-5));
}

TEST_CASE("charge variance matches the unperturbed tilt at small beta") {
  auto g = ChargeModel::gaussian();
  auto [sv2, sr2] = variances(g, 1.0, 1e-4);
  CHECK(std::abs(sr2 - 1.0) < 0.1);  // sigma_rho^2(delta, 0) = 1 for gaussian charges
  CHECK(sv2 > 0.0);
}

TEST_CASE("variances outside the interior of the ballistic phase are refused") {
  auto g = ChargeModel::gaussian();
  CHECK_THROWS_AS(variances(g, 1.0, 0.8), DomainError);
  const double bc = beta_critical(g, 1.0).value;
  CHECK_THROWS_AS(variances(g, 1.0, bc * 0.9995), DomainError);
}

TEST_CASE("flat-piece endpoints") {
  auto g = ChargeModel::gaussian();
  auto [vt, rt] = tilde_endpoints(g, 1.0, 0.2);
  CHECK(vt > 0.0);
  CHECK(rt > 0.0);

  // both stay positive in the subballistic phase
  auto [vts, rts] = tilde_endpoints(g, 1.0, 0.8);
  CHECK(vts > 0.0);
  CHECK(rts > 0.0);

  // at criticality the flat piece closes onto the typical values
  const double bc = beta_critical(g, 1.0).value;
  auto [vtc, rtc] = tilde_endpoints(g, 1.0, bc);
  CHECK(vtc == doctest::Approx(speed(g, 1.0, bc)).epsilon(1e-6));
  CHECK(rtc == doctest::Approx(charge_density(g, 1.0, bc)).epsilon(1e-6));
}

TEST_CASE("critical slope of the excess free energy") {
  auto g = ChargeModel::gaussian();
  for (double delta : {0.5, 1.0, 2.0}) CHECK(critical_slope(g, delta) > 0.0);

  const double k1 = critical_slope(g, 1.0);
  const double bc = beta_critical(g, 1.0).value;
  for (double h : {1e-3, 1e-4}) {
    const double ratio = mu_of(g, 1.0, bc - h).value / h;
    CHECK(ratio == doctest::Approx(k1).epsilon(0.02));
  }
  // K equals the finite-difference slope of mu in beta at the curve
  const double h = 1e-4;
  const double fd = (mu_of(g, 1.0, bc - h).value - 0.0) / h;
  CHECK(fd == doctest::Approx(k1).epsilon(1e-3));
}

TEST_CASE("observable bundle for reporting") {
  auto g = ChargeModel::gaussian();
  ObservableSet o = observable_set(g, 1.0, 0.8);
  CHECK(o.v == 0.0);
  CHECK(o.rho == 0.0);
  CHECK(std::isnan(o.sigma_v2));
  CHECK(o.v_tilde > 0.0);
  CHECK(!o.method_notes.empty());
}

}  // TEST_SUITE
