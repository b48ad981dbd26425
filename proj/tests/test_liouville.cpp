#include <catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace sphlab;
using Catch::Approx;

namespace {

MeroFunc exp_z() {
  return FormulaFunc::from_pair([](cplx z) { return std::exp(z); }, [](cplx z) { return std::exp(z); });
}

double u_z(cplx z) { return -std::log1p(std::norm(z)); }
double u_exp(cplx z) {
  const double x = z.real();
  return x - std::log1p(std::exp(2.0 * x));
}

double max_residual(const MeroFunc& f, const Grid2D& g) { return liouville_residual(f, g).max_abs(); }

double solver_error(double (*oracle)(cplx), const Grid2D& g) {
  const NodeGrid B = sample(g, oracle);
  const PDESolution s = solve_liouville(NodeGrid(g, 4.0), B, g);
  REQUIRE(s.converged);
  CHECK(s.residual_norm <= 1e-10 * (1.0 + s.u.max_abs()));
  double e = 0.0;
  for (std::size_t k = 0; k < B.values.size(); ++k) e = std::max(e, std::abs(s.u.values[k] - B.values[k]));
  return e;
}

}  // namespace

TEST_CASE("Grid2D invariants") {
  const Grid2D g = Grid2D::with_spacing(-0.5, 0.5, -0.5, 0.5, 1.0 / 64);
  CHECK(g.nx() == 65);
  CHECK(g.h() == 1.0 / 64);
  CHECK(g.node(64, 0) == cplx(0.5, -0.5));
  CHECK_THROWS_AS(Grid2D(0.0, 1.0, 0.0, 1.0, 7, 8), InvalidArgumentError);
  CHECK_THROWS_AS(Grid2D(0.0, 1.0, 0.0, 2.0, 9, 9), InvalidArgumentError);
  const std::string csv = to_csv(NodeGrid(Grid2D(0.0, 1.0, 0.0, 1.0, 8, 8), 0.5));
  CHECK(csv.rfind("x0,x1,y0,y1,nx,ny\n0,1,0,1,8,8\n0.5,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 8);
}

TEST_CASE("residual of log f# is second order") {
  double prev = 0.0;
  for (int k = 5; k <= 7; ++k) {
    const double r = max_residual(testutil::linear(1.0), Grid2D::with_spacing(-0.5, 0.5, -0.5, 0.5, std::ldexp(1.0, -k)));
    if (k == 6) CHECK(r <= 0.01);
    if (prev > 0.0) CHECK(std::log2(prev / r) == Approx(2.0).margin(0.2));
    prev = r;
  }
  prev = 0.0;
  for (int k = 4; k <= 6; ++k) {
    const double r = max_residual(exp_z(), Grid2D::with_spacing(-1.0, 1.0, -1.0, 1.0, std::ldexp(1.0, -k)));
    if (prev > 0.0) CHECK(std::log2(prev / r) == Approx(2.0).margin(0.2));
    prev = r;
  }
}

TEST_CASE("critical points are reported") {
  const MeroFunc z2 = RationalFunc::polynomial(Polynomial{0.0, 0.0, 1.0});
  try {
    liouville_residual(z2, Grid2D::with_spacing(-0.5, 0.5, -0.5, 0.5, 1.0 / 16));
    FAIL("expected CriticalPointError");
  } catch (const CriticalPointError& e) {
    REQUIRE_FALSE(e.nodes().empty());
    for (const auto& z : e.nodes()) CHECK(std::abs(z) < 0.1);
  }
}

TEST_CASE("solver: V = 0 gives the discrete harmonic extension") {
  const Grid2D g = Grid2D::with_spacing(0.0, 1.0, 0.0, 1.0, 1.0 / 16);
  // x^2 - y^2 and xy are harmonic and exact for the 5-point stencil.
  const NodeGrid B = sample(g, [](cplx z) { return z.real() * z.real() - z.imag() * z.imag() + 3.0 * z.real() * z.imag(); });
  const PDESolution s = solve_liouville(NodeGrid(g, 0.0), B, g);
  CHECK(s.converged);
  CHECK(s.newton_iters == 0);
  for (std::size_t k = 0; k < B.values.size(); ++k) CHECK(s.u.values[k] == Approx(B.values[k]).margin(1e-12));
}

TEST_CASE("solver matches closed-form solutions with stable K") {
  std::vector<double> K;
  for (int k = 5; k <= 7; ++k) {
    const double h = std::ldexp(1.0, -k);
    K.push_back(solver_error(u_z, Grid2D::with_spacing(-0.5, 0.5, -0.5, 0.5, h)) / (h * h));
  }
  const auto [lo, hi] = std::minmax_element(K.begin(), K.end());
  CHECK(*hi / *lo <= 1.25);

  const double h = 1.0 / 32;
  CHECK(solver_error(u_exp, Grid2D::with_spacing(-1.0, 1.0, -1.0, 1.0, h)) <= 1.0 * h * h);
}

TEST_CASE("solver rejects invalid data") {
  const Grid2D g = Grid2D::with_spacing(0.0, 1.0, 0.0, 1.0, 1.0 / 8);
  CHECK_THROWS_AS(solve_liouville(NodeGrid(g, -1.0), NodeGrid(g), g), InvalidArgumentError);
  NodeGrid B(g);
  B(0, 0) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(solve_liouville(NodeGrid(g, 1.0), B, g), InvalidArgumentError);
}

TEST_CASE("Newton divergence returns the best iterate") {
  // Large V on a large square has no solution branch near the harmonic start.
  const Grid2D g = Grid2D::with_spacing(0.0, 4.0, 0.0, 4.0, 0.25);
  NewtonOptions opt;
  opt.max_iters = 5;
  try {
    const PDESolution s = solve_liouville(NodeGrid(g, 50.0), NodeGrid(g, 2.0), g, opt);
    FAIL("expected NewtonDivergedError, converged with residual " << s.residual_norm);
  } catch (const NewtonDivergedError& e) {
    CHECK_FALSE(e.best().converged);
    CHECK(std::isfinite(e.best().residual_norm));
  }
}

TEST_CASE("superharmonicity of log f#") {
  const Grid2D g = Grid2D::with_spacing(-0.5, 0.5, -0.5, 0.5, 1.0 / 32);
  CHECK(superharmonic_check(testutil::linear(1.0), g).violations == 0);
  CHECK(superharmonic_check(exp_z(), g).violations == 0);
  const auto harmonic = superharmonic_check_values(sample(g, [](cplx z) { return z.real() * z.imag(); }));
  CHECK(harmonic.violations == 0);
  CHECK(std::abs(harmonic.worst) < 1e-14);
  // z^2 has a critical node at 0: excluded, not a violation.
  const auto z2 = superharmonic_check(RationalFunc::polynomial(Polynomial{0.0, 0.0, 1.0}), g);
  CHECK(z2.excluded.size() == 1);
  // log|z|^2-type subharmonic data is caught.
  const auto sub = superharmonic_check_values(sample(g, [](cplx z) { return std::norm(z); }));
  CHECK(sub.violations > 0);
}

TEST_CASE("blowup_demo") {
  const Grid2D g = Grid2D::with_spacing(-0.5, 0.5, -0.5, 0.5, 1.0 / 64);
  BlowupOptions opt;
  opt.probes = {0.4};
  const auto rows = blowup_demo(builtin_family("nz", {}), g, opt);
  REQUIRE(rows.size() == 8);
  for (const auto& r : rows) {
    CHECK(r.max_u == Approx(std::log(r.n)).margin(1e-12));
    CHECK(r.probe_u[0] == Approx(std::log(r.n / (1.0 + 0.16 * r.n * r.n))).margin(1e-12));
    const double area = spherical_area(builtin_family("nz", {}).at(r.n), g.rectangle(), 1e-9).value;
    CHECK(r.mass == Approx(area).epsilon(0.01));
  }
  CHECK(rows.back().mass == Approx(1.0).margin(0.01));

  // Upper half plane: f_n# = n / (2 cosh(n y)). The schedule stops while f_n#
  // stays above the critical-node threshold on the grid.
  FamilyParams upper;
  upper.indices = {4, 8, 16, 32};
  const auto e = blowup_demo(builtin_family("exp_inz", upper), Grid2D::with_spacing(-0.5, 0.5, 0.3, 0.6, 1.0 / 40));
  for (std::size_t k = 1; k < e.size(); ++k) CHECK(e[k].max_u < e[k - 1].max_u);
  CHECK(e.back().max_u == Approx(std::log(32.0 / (2.0 * std::cosh(9.6)))).margin(1e-12));
  upper.indices = {64};
  CHECK_THROWS_AS(blowup_demo(builtin_family("exp_inz", upper), Grid2D::with_spacing(-0.5, 0.5, 0.3, 0.6, 1.0 / 40)),
                  CriticalPointError);

  const auto c = blowup_demo(FamilySpec([](int) { return testutil::linear(0.5); }, {1, 2, 3}, true, "flat"), g);
  for (const auto& r : c) {
    CHECK(r.max_u == c.front().max_u);
    CHECK(r.mass == c.front().mass);
  }
  CHECK_THROWS_AS(blowup_demo(builtin_family("constant", {}), g), CriticalPointError);
}
