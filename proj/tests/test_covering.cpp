#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace sphlab;
using Catch::Approx;

namespace {

RationalFunc z_pow(int k) { return RationalFunc::polynomial(Polynomial::monomial(1.0, k)); }

// Number of zeros of h inside the circle |z - c| = r: winding number of h
// along the circle, by accumulating argument increments.
int winding_number(const Polynomial& h, cplx c, double r, int samples = 8192) {
  double total = 0.0;
  cplx prev = h(c + r);
  for (int k = 1; k <= samples; ++k) {
    const cplx cur = h(c + std::polar(r, 2.0 * std::numbers::pi * k / samples));
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

}  // namespace

TEST_CASE("covering_count examples") {
  const Domain2D disk = Domain2D::unit_disk();
  const auto a = covering_count(z_pow(2), SpherePoint::finite(0.25), disk);
  CHECK(a.with_multiplicity == 2);
  CHECK(a.distinct == 2);
  const auto b = covering_count(z_pow(2), SpherePoint::finite(0.0), disk);
  CHECK(b.with_multiplicity == 2);
  CHECK(b.distinct == 1);
  const RationalFunc inv(Polynomial{1.0}, Polynomial{0.0, 1.0});
  const auto c = covering_count(inv, SpherePoint::infinity(), disk);
  CHECK(c.with_multiplicity == 1);
  CHECK(c.distinct == 1);
  CHECK_FALSE(c.boundary_warning());
}

TEST_CASE("covering_count edge cases") {
  const Domain2D disk = Domain2D::unit_disk();
  CHECK(covering_count(z_pow(1), SpherePoint::finite(1.0), disk).boundary_warning());
  CHECK(covering_count(z_pow(1), SpherePoint::finite(1.0), disk).with_multiplicity == 0);
  const RationalFunc c = RationalFunc::polynomial(Polynomial{2.0});
  CHECK_THROWS_AS(covering_count(c, SpherePoint::finite(2.0), disk), DegenerateTargetError);
  CHECK(covering_count(c, SpherePoint::finite(1.0), disk).with_multiplicity == 0);
  // Polynomials never reach infinity in the plane.
  CHECK(covering_count(z_pow(3), SpherePoint::infinity(), disk).with_multiplicity == 0);
}

TEST_CASE("covering counts agree with the argument principle") {
  std::mt19937_64 rng(41);
  int disagreements = 0, compared = 0;
  while (compared < 50) {
    const RationalFunc f = testutil::random_rational(rng, 1 + compared % 5);
    const SpherePoint w = testutil::random_sphere_point(rng);
    const Polynomial h =
        w.is_infinity() ? f.denominator() : f.numerator() - w.value() * f.denominator();
    // Skip targets with a root too close to the circle for the contour sum.
    bool near = false;
    for (const auto& z : polynomial_roots(h)) near = near || std::abs(std::abs(z) - 1.0) < 1e-3;
    if (near) continue;
    const int counted = covering_count(f, w, Domain2D::unit_disk()).with_multiplicity;
    if (counted != winding_number(h, 0.0, 1.0)) ++disagreements;
    ++compared;
  }
  CHECK(disagreements == 0);
}

TEST_CASE("equal-area sphere grid") {
  for (int bands : {1, 16, 64}) {
    const auto g = equal_area_sphere_grid(bands);
    double sum = 0.0;
    for (const auto& [p, w] : g.points) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(g.total_weight == Approx(std::numbers::pi).epsilon(1e-15));
    CHECK(sum == Approx(std::numbers::pi).epsilon(1e-9));
  }
}

TEST_CASE("covering_area_oracle examples") {
  const Domain2D disk = Domain2D::unit_disk();
  CHECK(covering_area_oracle(z_pow(1), disk, 64) == Approx(0.5).margin(0.01));
  CHECK(covering_area_oracle(RationalFunc::polynomial(Polynomial{0.0, 3.0}), disk, 64) == Approx(0.9).margin(0.01));
  CHECK(covering_area_oracle(RationalFunc::polynomial(Polynomial{0.7}), disk, 64) == 0.0);
  CHECK_THROWS_AS(covering_area_oracle(z_pow(1), disk, 15), ResolutionTooLowError);
  CHECK_THROWS_AS(covering_area_oracle(z_pow(7), disk, 64), InvalidArgumentError);
  CHECK(covering_area_oracle(z_pow(3), disk, 32, 1) == covering_area_oracle(z_pow(3), disk, 32, 3));
}

TEST_CASE("multiplicity threshold") {
  auto [m, eps] = multiplicity_threshold(0.5);
  CHECK(m == 0);
  CHECK(eps == Approx(std::numbers::pi / 2));
  std::tie(m, eps) = multiplicity_threshold(2.0);
  CHECK(m == 2);
  CHECK(eps == Approx(std::numbers::pi / 3));
  std::tie(m, eps) = multiplicity_threshold(2.7);
  CHECK(m == 2);
  CHECK(eps == Approx(std::numbers::pi * (1.0 - 2.7 / 3.0)));
}

TEST_CASE("low_multiplicity_report examples") {
  const Domain2D disk = Domain2D::unit_disk();
  const auto a = low_multiplicity_report(z_pow(1), disk, 0.5, 64);
  CHECK(a.m == 0);
  CHECK(a.epsilon == Approx(std::numbers::pi / 2));
  CHECK(a.measure_low == Approx(std::numbers::pi / 2).margin(a.grid_error));

  const auto b = low_multiplicity_report(z_pow(2), disk, 2.0, 64);
  CHECK(b.m == 2);
  CHECK(b.measure_low >= std::numbers::pi / 3);

  const auto c = low_multiplicity_report(RationalFunc::polynomial(Polynomial{0.3}), disk, 1.0, 64);
  CHECK(c.measure_low == Approx(std::numbers::pi).epsilon(1e-12));

  CHECK_THROWS_AS(low_multiplicity_report(z_pow(1), disk, 0.1, 64), AreaBoundViolatedError);
}

TEST_CASE("low-multiplicity pigeonhole on random functions") {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 10; ++k) {
    const RationalFunc f = testutil::random_rational(rng, 1 + k % 3);
    const double area = spherical_area(MeroFunc(f), Domain2D::unit_disk(), 1e-8).value;
    const double C = area + 0.37;
    const auto rep = low_multiplicity_report(f, Domain2D::unit_disk(), C, 48);
    CHECK(rep.measure_low >= rep.epsilon - 3.0 * rep.grid_error);
  }
}

TEST_CASE("three_separated_points") {
  SphereSampleSet e;
  e.add(SpherePoint::finite(0.0), 1e-3);
  e.add(SpherePoint::finite(1.0), 1e-3);
  e.add(SpherePoint::infinity(), 1e-3);
  const auto t = three_separated_points(e, 2e-3);
  CHECK(t.achieved_delta == Approx(1.0 / std::sqrt(2.0)));
  int found = 0;
  for (const auto& p : {t.a, t.b, t.c})
    for (const auto& [q, w] : e.points) found += p == q;
  CHECK(found == 3);

  const auto full = equal_area_sphere_grid(32);
  const auto tf = three_separated_points(full, std::numbers::pi);
  CHECK(tf.achieved_delta >= 1.0 / std::sqrt(2.0));
  CHECK(tf.target_delta == Approx(1.0 / std::sqrt(2.0)));
  CHECK(tf.achieved_delta == detail::min_pairwise(tf.a, tf.b, tf.c));

  // Spherical cap of area pi/4 around 0: chordal radius 1/2.
  SphereSampleSet cap;
  for (const auto& [p, w] : full.points)
    if (chordal_distance(p, SpherePoint::finite(0.0)) < 0.5) cap.add(p, w);
  const double alpha = std::min(std::numbers::pi / 4, cap.total_weight);
  const auto tc = three_separated_points(cap, alpha);
  CHECK(tc.achieved_delta > 0.0);
  CHECK(tc.achieved_delta >= 0.25 * std::sqrt(alpha / std::numbers::pi));
  // Brute force over the sample: greedy is within a factor 2 of the best triple.
  double best = 0.0;
  const auto& P = cap.points;
  for (std::size_t i = 0; i < P.size(); ++i)
    for (std::size_t j = i + 1; j < P.size(); ++j)
      for (std::size_t k = j + 1; k < P.size(); ++k)
        best = std::max(best, detail::min_pairwise(P[i].first, P[j].first, P[k].first));
  CHECK(tc.achieved_delta >= 0.5 * best);

  CHECK_THROWS_AS(three_separated_points(e, 1.0), InsufficientMeasureError);
  SphereSampleSet two;
  two.add(SpherePoint::finite(0.0), 1.0);
  two.add(SpherePoint::finite(0.0), 1.0);
  two.add(SpherePoint::finite(2.0), 1.0);
  CHECK_THROWS_AS(three_separated_points(two, 1.0), DegenerateSetError);
}
