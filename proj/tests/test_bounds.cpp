#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace sphlab;
using Catch::Approx;

TEST_CASE("poincare density") {
  CHECK(poincare_density_disk(0.0) == 1.0);
  CHECK(poincare_density_disk(0.5) == Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(poincare_density_disk({0.0, 0.99}) == Approx(1.0 / (1.0 - 0.9801)).epsilon(1e-12));
  CHECK_THROWS_AS(poincare_density_disk(1.0), OutsideDiskError);
}

TEST_CASE("dufresnoy-yamashita bound") {
  CHECK(dufresnoy_yamashita_bound(0.5, 0.0) == Approx(1.0).epsilon(1e-15));
  CHECK(dufresnoy_yamashita_bound(0.2, 0.0) == Approx(0.5).epsilon(1e-15));
  CHECK(dufresnoy_yamashita_bound(0.999999, 0.0) > 900.0);
  CHECK_THROWS_AS(dufresnoy_yamashita_bound(1.0, 0.0), ParameterRangeError);
  CHECK_THROWS_AS(dufresnoy_yamashita_bound(0.0, 0.0), ParameterRangeError);
  double prev = 0.0;
  for (double C = 0.05; C < 1.0; C += 0.05) {
    const double b = dufresnoy_yamashita_bound(C, 0.3);
    CHECK(b > prev);
    prev = b;
  }
  prev = 0.0;
  for (double r = 0.0; r < 1.0; r += 0.1) {
    const double b = dufresnoy_yamashita_bound(0.4, std::polar(r, 1.0));
    CHECK(b > prev);
    prev = b;
  }
}

TEST_CASE("steinmetz and fkr bounds") {
  CHECK(steinmetz_bound(0.5, 0.0) == 2.0);
  CHECK(steinmetz_bound(0.3, 0.0) == Approx(10.0 / 3.0).epsilon(1e-15));
  CHECK(steinmetz_bound(0.5, 0.5) == Approx(2.0 * 16.0 / 9.0).epsilon(1e-15));
  CHECK(fkr_bound(0.5, 0.0) == 1.0);
  CHECK(fkr_bound(0.3, 0.0) == 3.0);
  CHECK_THROWS_AS(fkr_bound(0.51, 0.0), ParameterRangeError);
  CHECK_THROWS_AS(steinmetz_bound(0.0, 0.0), ParameterRangeError);
  CHECK_THROWS_AS(fkr_bound(0.3, 2.0), OutsideDiskError);
}

TEST_CASE("extremal value at the origin") {
  CHECK(extremal_sharp_at_zero(0.5) == 1.0);
  CHECK(extremal_sharp_at_zero(0.3) == Approx(3.0).epsilon(1e-15));
  double prev = std::numeric_limits<double>::infinity();
  for (double c = 0.01; c <= 0.5; c += 0.01) {
    const double v = extremal_sharp_at_zero(c);
    CHECK(v < prev);
    CHECK(v == fkr_bound(c, 0.0));
    prev = v;
  }
  // Diverges like 1/c.
  CHECK(extremal_sharp_at_zero(1e-6) * 1e-6 == Approx(1.0).epsilon(1e-9));
}

TEST_CASE("fkr never exceeds steinmetz") {
  int failures = 0;
  for (int i = 0; i < 64; ++i) {
    const double c = 0.5 * (i + 1) / 64.0;
    for (int j = 0; j < 128; ++j) {
      const cplx z = std::polar(0.999 * j / 127.0, 0.7 * j);
      if (fkr_bound(c, z) > steinmetz_bound(c, z)) ++failures;
    }
  }
  CHECK(failures == 0);
}

TEST_CASE("boundary asymptotics of fkr") {
  for (double c : {0.1, 0.3, 0.5}) {
    for (int k = 2; k <= 6; ++k) {
      const double r = 1.0 - std::pow(10.0, -k);
      const double t = 1.0 - r * r;
      const double scaled = t * t * fkr_bound(c, r);
      CHECK(scaled == Approx(1.0 / c).epsilon(4.0 * c * c * t * t));
    }
  }
  CHECK(kRefinedAsymptoticConstant == Approx(0.3819660112501051));
}

TEST_CASE("min_spherical_derivative") {
  CHECK(min_spherical_derivative(testutil::linear(1.0)) == Approx(1.0 / (1.0 + 0.999 * 0.999)).epsilon(1e-12));
  CHECK(min_spherical_derivative(RationalFunc::polynomial(Polynomial{0.4})) == 0.0);
  std::mt19937_64 rng(51);
  int above = 0;
  for (int k = 0; k < 100; ++k) {
    if (min_spherical_derivative(MeroFunc(testutil::random_rational(rng, 1 + k % 4))) > 0.51) ++above;
  }
  CHECK(above == 0);
}

TEST_CASE("verify_bound") {
  const MeroFunc z = testutil::linear(1.0);
  const auto fkr = verify_bound(z, BoundSpec::fkr(0.45));
  CHECK(fkr.grid_violations.empty());
  CHECK(fkr.max_ratio <= 1.0 + 1e-6);
  CHECK(fkr.grid_points == 1 + 63 * 128);
  CHECK(fkr.bound_name == "fkr");

  // a z with a^2/(1+a^2) = C.
  const double C = 0.3;
  const double a = std::sqrt(C / (1.0 - C));
  const auto dy = verify_bound(testutil::linear(a), BoundSpec::dufresnoy(C));
  CHECK(dy.grid_violations.empty());
  CHECK(dy.hypothesis_value == Approx(C).margin(1e-7));
  // At the origin the bound is attained.
  CHECK(dy.max_ratio == Approx(1.0).epsilon(1e-12));

  CHECK(verify_bound(z, BoundSpec::steinmetz(0.45)).grid_violations.empty());
  CHECK_THROWS_AS(verify_bound(z, BoundSpec::dufresnoy(0.1)), HypothesisViolatedError);
  CHECK_THROWS_AS(verify_bound(testutil::linear(0.5), BoundSpec::fkr(0.45)), HypothesisViolatedError);
}
