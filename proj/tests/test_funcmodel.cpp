#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace sphlab;
using Catch::Approx;

namespace {

MeroFunc exp_inz(int n) { return builtin_family("exp_inz", {}).at(n); }

}  // namespace

TEST_CASE("jet_at examples") {
  const Jet a = jet_at(testutil::linear(1.0), 0.0);
  CHECK(a.value == SpherePoint::finite(0.0));
  CHECK(a.sph_deriv == 1.0);

  const MeroFunc inv = RationalFunc(Polynomial{1.0}, Polynomial{0.0, 1.0});
  const Jet b = jet_at(inv, 0.0);
  CHECK(b.value.is_infinity());
  CHECK(b.sph_deriv == Approx(1.0).epsilon(1e-15));

  for (int n : {1, 7, 40}) {
    for (double x : {-0.8, 0.0, 0.3}) {
      CHECK(exp_inz(n).sph_deriv(x) == Approx(n / 2.0).epsilon(1e-14));
    }
    // f# = n / (2 cosh(n y)) off the real axis.
    CHECK(exp_inz(n).sph_deriv({0.1, 0.2}) == Approx(n / (2.0 * std::cosh(0.2 * n))).epsilon(1e-12));
  }
}

TEST_CASE("formula functions: excluded points and overflow") {
  const FormulaFunc inv_z([](cplx z) { return FormulaValue{SpherePoint::finite(1.0 / z), -1.0 / (z * z)}; }, {0.0},
                          "1/z");
  CHECK_THROWS_AS(inv_z.jet(0.0), EvaluationDomainError);
  CHECK(inv_z.jet(1e-8).sph_deriv == Approx(1.0).epsilon(1e-12));
  // exp(i n z) far below the real axis has |f| ~ e^{n |y|}; no overflow in f#.
  const double s = exp_inz(100).sph_deriv({0.0, -5.0});
  CHECK(s == Approx(100.0 / (2.0 * std::cosh(500.0))).epsilon(1e-10));
  CHECK(std::isfinite(s));
}

TEST_CASE("validate_formula flags a wrong derivative") {
  const auto good = FormulaFunc::from_pair([](cplx z) { return std::exp(z); }, [](cplx z) { return std::exp(z); });
  const auto bad = FormulaFunc::from_pair([](cplx z) { return std::exp(z); }, [](cplx z) { return 2.0 * std::exp(z); });
  const BoundingBox box{-1.0, 1.0, -1.0, 1.0};
  CHECK(validate_formula(good, box).empty());
  CHECK(validate_formula(bad, box).size() == 256);
}

TEST_CASE("rational functions are reduced to coprime form") {
  // (z - 1)(z + 2) / ((z - 1)(z - 3)) = (z + 2)/(z - 3)
  const Polynomial p = Polynomial{-1.0, 1.0} * Polynomial{2.0, 1.0};
  const Polynomial q = Polynomial{-1.0, 1.0} * Polynomial{-3.0, 1.0};
  const RationalFunc f(p, q);
  CHECK(f.degree() == 1);
  CHECK(f.numerator().degree() == 1);
  CHECK(f.denominator().degree() == 1);
  const cplx z(0.4, 0.9);
  CHECK(std::abs(f.jet(z).value.value() - (z + 2.0) / (z - 3.0)) < 1e-13);
  // A nearly common factor (perturbed far beyond the threshold) is kept.
  const RationalFunc g(p, Polynomial{-1.001, 1.0} * Polynomial{-3.0, 1.0});
  CHECK(g.degree() == 2);
  CHECK_THROWS_AS(RationalFunc(Polynomial{1.0}, Polynomial{}), InvalidArgumentError);
  CHECK(RationalFunc(Polynomial{}, Polynomial{0.0, 1.0}).is_constant());
}

TEST_CASE("builtin families") {
  FamilyParams p;
  p.indices = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto nz = builtin_family("nz", p);
  CHECK(nz.locally_univalent);
  CHECK(nz.at(3).value({0.5, 0.25}).value() == cplx(1.5, 0.75));

  FamilyParams q;
  q.m = 3;
  const auto nP = builtin_family("nP", q);
  CHECK_FALSE(nP.locally_univalent);
  CHECK(nP.area_bound.value() == 3.0);
  const cplx z(0.3, -0.2);
  CHECK(std::abs(nP.at(5).value(z).value() - 5.0 * (2.0 * z * z * z - 1.0)) < 1e-14);

  const auto c = builtin_family("constant", {});
  for (int n : c.indices) {
    CHECK(c.at(n).value(z) == SpherePoint::finite(0.0));
    CHECK(c.at(n).sph_deriv(z) == 0.0);
  }
  CHECK(builtin_family("exp_inz", {}).locally_univalent);
  CHECK_THROWS_AS(builtin_family("sinz", {}), UnknownFamilyError);
  FamilyParams bad;
  bad.indices = {1, 4, 2};
  CHECK_THROWS_AS(builtin_family("nz", bad), InvalidArgumentError);
}

TEST_CASE("local univalence flag is checked, not assumed") {
  const Domain2D disk = Domain2D::unit_disk();
  CHECK(check_local_univalence(builtin_family("nz", {}), disk).ok);
  CHECK(check_local_univalence(builtin_family("exp_inz", {}), disk).ok);
  FamilyParams m1;
  m1.m = 1;
  CHECK(check_local_univalence(builtin_family("nP", m1), disk).ok);
  FamilyParams m3;
  m3.m = 3;
  const auto r = check_local_univalence(builtin_family("nP", m3), disk);
  CHECK_FALSE(r.ok);
  CHECK(std::abs(r.where) < 1e-6);  // P' = 6z^2 vanishes at 0
  // 1/z^2 has a double pole at 0.
  FamilySpec dp([](int) { return MeroFunc(RationalFunc(Polynomial{1.0}, Polynomial{0.0, 0.0, 1.0})); }, {1, 2}, true,
                "double pole");
  CHECK_FALSE(check_local_univalence(dp, disk).ok);
}

TEST_CASE("rigid-motion and reciprocal invariance of f#") {
  std::mt19937_64 rng(21);
  int motion_failures = 0, reciprocal_failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const RationalFunc f = testutil::random_rational(rng, 1 + k % 4);
    const RigidMotion t = testutil::random_motion(rng);
    const cplx z = testutil::random_cplx(rng);
    const double s = f.jet(z).sph_deriv;
    if (std::abs(compose(t, f).jet(z).sph_deriv - s) > 1e-9 * (1.0 + s)) ++motion_failures;
    if (std::abs(f.reciprocal().jet(z).sph_deriv - s) > 1e-10 * (1.0 + s)) ++reciprocal_failures;
  }
  CHECK(motion_failures == 0);
  CHECK(reciprocal_failures == 0);
}

TEST_CASE("f# matches the chordal difference quotient") {
  std::mt19937_64 rng(22);
  int checked = 0;
  for (int k = 0; k < 200; ++k) {
    const RationalFunc f = testutil::random_rational(rng, 1 + k % 4);
    const cplx z = testutil::random_cplx(rng);
    const double s = f.jet(z).sph_deriv;
    if (s <= 0.1) continue;
    const cplx dir = std::polar(1.0, 0.37 * k);
    double err[2];
    const double hs[2] = {1e-3, 1e-4};
    for (int i = 0; i < 2; ++i) {
      const double h = hs[i];
      err[i] = std::abs(chordal_distance(f.jet(z + h * dir).value, f.jet(z).value) / h - s);
    }
    // First-order behaviour: the error shrinks with h (or is already at rounding level).
    CHECK((err[1] <= 0.2 * err[0] || err[1] < 1e-6 * (1.0 + s)));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("formula f# agrees with rational f# for the same function") {
  const MeroFunc r = RationalFunc(Polynomial{1.0, 2.0}, Polynomial{-1.0, 0.0, 1.0});
  const FormulaFunc f = FormulaFunc::from_pair([](cplx z) { return (1.0 + 2.0 * z) / (z * z - 1.0); },
                                               [](cplx z) {
                                                 const cplx q = z * z - 1.0;
                                                 return (2.0 * q - (1.0 + 2.0 * z) * 2.0 * z) / (q * q);
                                               });
  for (cplx z : {cplx(0.2, 0.1), cplx(1.001, 0.0), cplx(-3.0, 2.0)}) {
    CHECK(f.jet(z).sph_deriv == Approx(r.sph_deriv(z)).epsilon(1e-9));
  }
}
