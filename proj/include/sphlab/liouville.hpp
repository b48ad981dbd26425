#pragma once

// Liouville's equation -Lap u = V e^{2u} on uniform square grids.
//
// For locally univalent f, u = log f# solves -Lap u = 4 e^{2u}; the residual
// and superharmonicity checks test that identity with the 5-point Laplacian.
// solve_liouville runs damped Newton with Dirichlet data and a sparse direct
// factorization of the Jacobian.

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sphlab/errors.hpp"
#include "sphlab/funcmodel.hpp"
#include "sphlab/quadrature.hpp"

namespace sphlab {

/// Uniform node grid over a rectangle with equal spacing in x and y.
class Grid2D {
 public:
  Grid2D(double x0, double x1, double y0, double y1, int nx, int ny) : x0_(x0), x1_(x1), y0_(y0), y1_(y1), nx_(nx), ny_(ny) {
    if (nx < 8 || ny < 8) throw InvalidArgumentError("Grid2D: need at least 8 nodes per direction");
    if (!(x1 > x0 && y1 > y0)) throw InvalidArgumentError("Grid2D: empty rectangle");
    const double hx = (x1 - x0) / (nx - 1), hy = (y1 - y0) / (ny - 1);
    if (std::abs(hx - hy) > 1e-12) throw InvalidArgumentError("Grid2D: spacing must be equal in x and y");
    h_ = hx;
  }

  /// Grid with spacing h (the extents must be multiples of h).
  static Grid2D with_spacing(double x0, double x1, double y0, double y1, double h) {
    const int nx = static_cast<int>(std::lround((x1 - x0) / h)) + 1;
    const int ny = static_cast<int>(std::lround((y1 - y0) / h)) + 1;
    return Grid2D(x0, x1, y0, y1, nx, ny);
  }

  double x0() const { return x0_; }
  double x1() const { return x1_; }
  double y0() const { return y0_; }
  double y1() const { return y1_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  cplx node(int i, int j) const { return {x0_ + i * h_, y0_ + j * h_}; }
  bool is_boundary(int i, int j) const { return i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1; }
  Domain2D rectangle() const { return Domain2D::rectangle(x0_, x1_, y0_, y1_); }

 private:
  double x0_, x1_, y0_, y1_;
  int nx_, ny_;
  double h_;
};

/// Values on the nodes of a grid, row-major (row j has y = y0 + j h).
struct NodeGrid {
  Grid2D grid;
  std::vector<double> values;

  explicit NodeGrid(const Grid2D& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}

  double& operator()(int i, int j) { return values[grid.index(i, j)]; }
  double operator()(int i, int j) const { return values[grid.index(i, j)]; }

  /// Max |value| over finite entries.
  double max_abs() const {
    double m = 0.0;
    for (double v : values)
      if (std::isfinite(v)) m = std::max(m, std::abs(v));
    return m;
  }
};

template <typename Fn>
NodeGrid sample(const Grid2D& g, Fn&& fn) {
  NodeGrid out(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) out(i, j) = fn(g.node(i, j));
  return out;
}

/// CSV: "x0,x1,y0,y1,nx,ny", its values, then one line per grid row.
inline std::string to_csv(const NodeGrid& g) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  const Grid2D& G = g.grid;
  os << "x0,x1,y0,y1,nx,ny\n"
     << num(G.x0()) << ',' << num(G.x1()) << ',' << num(G.y0()) << ',' << num(G.y1()) << ',' << G.nx() << ','
     << G.ny() << '\n';
  for (int j = 0; j < G.ny(); ++j) {
    for (int i = 0; i < G.nx(); ++i) os << (i ? "," : "") << num(g(i, j));
    os << '\n';
  }
  return os.str();
}

/// Nodes where f# <= 1e-8, so log f# is unusable (f is not locally univalent
/// there, or f# underflows).
class CriticalPointError : public Error {
 public:
  CriticalPointError(const std::string& what, std::vector<cplx> nodes) : Error(what), nodes_(std::move(nodes)) {}
  const std::vector<cplx>& nodes() const { return nodes_; }

 private:
  std::vector<cplx> nodes_;
};

inline constexpr double kCriticalSharpThreshold = 1e-8;

namespace detail {

// u = log f# on all nodes; throws if some node (outside `holes`) is critical.
inline NodeGrid log_sharp(const MeroFunc& f, const Grid2D& g, const std::vector<Hole>& holes = {}) {
  NodeGrid u(g);
  std::vector<cplx> bad;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const cplx z = g.node(i, j);
      const double s = f.sph_deriv(z);
      if (s <= kCriticalSharpThreshold) {
        u(i, j) = std::numeric_limits<double>::quiet_NaN();
        const bool excused =
            std::any_of(holes.begin(), holes.end(), [&](const Hole& h) { return std::abs(z - h.point) < h.radius; });
        if (!excused) bad.push_back(z);
      } else {
        u(i, j) = std::log(s);
      }
    }
  if (!bad.empty()) throw CriticalPointError("log f# undefined: f# <= 1e-8 at " + std::to_string(bad.size()) + " nodes", bad);
  return u;
}

inline double neg_laplacian(const NodeGrid& u, int i, int j) {
  const double h = u.grid.h();
  return (4.0 * u(i, j) - u(i - 1, j) - u(i + 1, j) - u(i, j - 1) - u(i, j + 1)) / (h * h);
}

}  // namespace detail

/// r = -Lap_h log f# - 4 (f#)^2 at interior nodes (NaN on the boundary).
inline NodeGrid liouville_residual(const MeroFunc& f, const Grid2D& g) {
  const NodeGrid u = detail::log_sharp(f, g);
  NodeGrid r(g, std::numeric_limits<double>::quiet_NaN());
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) r(i, j) = detail::neg_laplacian(u, i, j) - 4.0 * std::exp(2.0 * u(i, j));
  return r;
}

struct PDESolution {
  NodeGrid u;
  double residual_norm = 0.0;  // max-norm over interior nodes
  int newton_iters = 0;
  bool converged = false;
};

/// Newton stalled; carries the best iterate.
class NewtonDivergedError : public Error {
 public:
  NewtonDivergedError(const std::string& what, PDESolution best) : Error(what), best_(std::move(best)) {}
  const PDESolution& best() const { return best_; }

 private:
  PDESolution best_;
};

struct NewtonOptions {
  int max_iters = 200;
  int max_halvings = 40;
};

/// Solves -Lap_h u = V e^{2u} with u = boundary on the grid boundary, starting
/// from the discrete harmonic extension of the boundary data.
inline PDESolution solve_liouville(const NodeGrid& V, const NodeGrid& boundary, const Grid2D& g,
                                   const NewtonOptions& opt = {}) {
  if (V.values.size() != g.size() || boundary.values.size() != g.size()) {
    throw InvalidArgumentError("solve_liouville: grid size mismatch");
  }
  for (double v : V.values)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgumentError("solve_liouville: V must be finite and >= 0");
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (g.is_boundary(i, j) && !std::isfinite(boundary(i, j)))
        throw InvalidArgumentError("solve_liouville: boundary values must be finite");

  const int mx = g.nx() - 2, my = g.ny() - 2;
  const Eigen::Index n = static_cast<Eigen::Index>(mx) * my;
  const double ih2 = 1.0 / (g.h() * g.h());
  auto unk = [&](int i, int j) { return static_cast<Eigen::Index>(j - 1) * mx + (i - 1); };

  // A = -Lap_h restricted to interior nodes; bc carries the Dirichlet data.
  Eigen::VectorXd bc = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd vint(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 5);
  for (int j = 1; j <= my; ++j)
    for (int i = 1; i <= mx; ++i) {
      const Eigen::Index k = unk(i, j);
      vint[k] = V(i, j);
      trip.emplace_back(k, k, 4.0 * ih2);
      const int ni[4] = {i - 1, i + 1, i, i};
      const int nj[4] = {j, j, j - 1, j + 1};
      for (int s = 0; s < 4; ++s) {
        if (g.is_boundary(ni[s], nj[s])) {
          bc[k] += boundary(ni[s], nj[s]) * ih2;
        } else {
          trip.emplace_back(k, unk(ni[s], nj[s]), -ih2);
        }
      }
    }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  auto residual = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return A * u - bc - (vint.array() * (2.0 * u.array()).exp()).matrix();
  };
  auto assemble = [&](const Eigen::VectorXd& u, double rnorm, int iters, bool conv) {
    PDESolution s{NodeGrid(g), rnorm, iters, conv};
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) s.u(i, j) = g.is_boundary(i, j) ? boundary(i, j) : u[unk(i, j)];
    return s;
  };
  auto tolerance = [&](const Eigen::VectorXd& u) {
    double m = u.size() ? u.cwiseAbs().maxCoeff() : 0.0;
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        if (g.is_boundary(i, j)) m = std::max(m, std::abs(boundary(i, j)));
    return 1e-10 * (1.0 + m);
  };

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success) throw Error("solve_liouville: Laplacian factorization failed");
  Eigen::VectorXd u = lu.solve(bc);

  Eigen::VectorXd F = residual(u);
  double fnorm = F.cwiseAbs().maxCoeff();
  int iters = 0;
  while (fnorm > tolerance(u)) {
    if (iters >= opt.max_iters) {
      throw NewtonDivergedError("solve_liouville: iteration cap reached", assemble(u, fnorm, iters, false));
    }
    Eigen::SparseMatrix<double> J = A;
    const Eigen::VectorXd d = 2.0 * vint.array() * (2.0 * u.array()).exp();
    for (Eigen::Index k = 0; k < n; ++k) J.coeffRef(k, k) -= d[k];
    lu.factorize(J);
    if (lu.info() != Eigen::Success) {
      throw NewtonDivergedError("solve_liouville: singular Jacobian", assemble(u, fnorm, iters, false));
    }
    const Eigen::VectorXd step = lu.solve(-F);
    double t = 1.0;
    bool accepted = false;
    for (int k = 0; k <= opt.max_halvings; ++k, t *= 0.5) {
      const Eigen::VectorXd trial = u + t * step;
      const Eigen::VectorXd Ft = residual(trial);
      const double tn = Ft.cwiseAbs().maxCoeff();
      if (std::isfinite(tn) && tn < fnorm) {
        u = trial;
        F = Ft;
        fnorm = tn;
        accepted = true;
        break;
      }
    }
    ++iters;
    if (!accepted) {
      throw NewtonDivergedError("solve_liouville: residual stagnates", assemble(u, fnorm, iters, false));
    }
  }
  return assemble(u, fnorm, iters, true);
}

struct SuperharmonicReport {
  int violations = 0;
  double worst = 0.0;  // largest (neighbor mean - u) seen
  std::vector<cplx> excluded;
};

/// Discrete mean-value test u >= mean of 4 neighbors - 1e-8 (1 + max|u|) at
/// interior nodes. NaN nodes (and their neighbors) are excluded.
inline SuperharmonicReport superharmonic_check_values(const NodeGrid& u) {
  const Grid2D& g = u.grid;
  SuperharmonicReport rep;
  rep.worst = -std::numeric_limits<double>::infinity();
  const double slack = 1e-8 * (1.0 + u.max_abs());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      if (std::isnan(u(i, j))) rep.excluded.push_back(g.node(i, j));
  for (int j = 1; j < g.ny() - 1; ++j)
    for (int i = 1; i < g.nx() - 1; ++i) {
      const double c = u(i, j);
      const double mean = 0.25 * (u(i - 1, j) + u(i + 1, j) + u(i, j - 1) + u(i, j + 1));
      if (std::isnan(c) || std::isnan(mean)) continue;
      rep.worst = std::max(rep.worst, mean - c);
      if (c < mean - slack) ++rep.violations;
    }
  return rep;
}

/// Superharmonicity of log f# on the grid; nodes with f# <= 1e-8 are excluded
/// and reported.
inline SuperharmonicReport superharmonic_check(const MeroFunc& f, const Grid2D& g) {
  NodeGrid u(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const double s = f.sph_deriv(g.node(i, j));
      u(i, j) = s > kCriticalSharpThreshold ? std::log(s) : std::numeric_limits<double>::quiet_NaN();
    }
  return superharmonic_check_values(u);
}

struct BlowupRow {
  int n = 0;
  double max_u = 0.0;
  double min_u = 0.0;
  double mass = 0.0;  // (1/pi) * integral of e^{2u} over the rectangle
  std::vector<double> probe_u;
};

struct BlowupOptions {
  /// Neighborhoods of declared bubble points where critical nodes are tolerated.
  std::vector<Hole> holes;
  std::vector<cplx> probes;
  double mass_tol = 1e-8;
};

/// u_n = log f_n# across the schedule: grid extremes, probe values and mass.
inline std::vector<BlowupRow> blowup_demo(const FamilySpec& fam, const Grid2D& g, const BlowupOptions& opt = {}) {
  std::vector<BlowupRow> rows;
  for (int n : fam.indices) {
    const MeroFunc f = fam.at(n);
    const NodeGrid u = detail::log_sharp(f, g, opt.holes);
    BlowupRow row;
    row.n = n;
    row.max_u = -std::numeric_limits<double>::infinity();
    row.min_u = std::numeric_limits<double>::infinity();
    for (double v : u.values) {
      if (std::isnan(v)) continue;
      row.max_u = std::max(row.max_u, v);
      row.min_u = std::min(row.min_u, v);
    }
    for (const auto& z : opt.probes) row.probe_u.push_back(std::log(f.sph_deriv(z)));
    row.mass = integrate_sph(
                   f, g.rectangle(), opt.mass_tol,
                   [](double s) { return s > 0.0 ? std::exp(2.0 * std::log(s)) : 0.0; })
                   .value;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace sphlab
