#pragma once

// Adaptive 2-D integration of (f#)^s over planar domains, reported in units
// of pi (so the spherical area of the whole sphere is 1).
//
// Each cell is integrated with tensor Gauss-Legendre rules of order 7 and 15;
// |I15 - I7| is the cell error indicator and the worst cells are split first.
// Disks and annuli are integrated in polar coordinates; holes are subtracted
// as polar disks of their own.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <queue>
#include <tuple>
#include <utility>
#include <vector>

#include "sphlab/domain.hpp"
#include "sphlab/errors.hpp"
#include "sphlab/funcmodel.hpp"
#include "sphlab/parallel.hpp"

namespace sphlab {

struct QuadResult {
  double value = 0.0;           // already divided by pi
  double error_estimate = 0.0;  // same units
  long cells = 0;
  bool converged = false;
};

/// Thrown when the cell cap is reached before the tolerance; carries the
/// partial result.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(const std::string& what, QuadResult partial) : Error(what), partial_(partial) {}
  const QuadResult& partial() const { return partial_; }

 private:
  QuadResult partial_;
};

struct QuadOptions {
  long max_cells = 1L << 22;
  /// Cells whose nodes see f# above this are split until they resolve the
  /// spike scale 1/f#.
  double spike_threshold = 1e3;
  /// Minimum cell size relative to diam(D).
  double floor_fraction = 1e-7;
  int threads = 0;
};

namespace detail {

template <int N>
struct GaussLegendre {
  std::array<double, N> x{};
  std::array<double, N> w{};

  GaussLegendre() {
    for (int i = 0; i < N; ++i) {
      double z = std::cos(std::numbers::pi * (i + 0.75) / (N + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= N; ++k) {
          const double p2 = p1;
          p1 = p0;
          p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = N * (z * p0 - p1) / (z * z - 1.0);
        const double dz = p0 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      x[static_cast<std::size_t>(i)] = z;
      w[static_cast<std::size_t>(i)] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
  }
};

inline const GaussLegendre<7>& gl7() {
  static const GaussLegendre<7> r;
  return r;
}
inline const GaussLegendre<15>& gl15() {
  static const GaussLegendre<15> r;
  return r;
}

// A parameter rectangle mapped to the plane, either directly (x, y) or in
// polar coordinates (r, theta) about `center`.
struct Patch {
  bool polar = false;
  cplx center{0.0, 0.0};
  double u0, u1, v0, v1;
  double sign = 1.0;
};

struct Cell {
  int patch;
  double u0, u1, v0, v1;
  double i15 = 0.0, i7 = 0.0, mid = 0.0;
  double peak = 0.0;
  long id = 0;
  bool floored = false;

  double err() const {
    const double e = std::abs(i15 - i7);
    return floored ? e + std::abs(i15 - mid) : e;
  }
  double value() const { return floored ? mid : i15; }
};

inline std::vector<Patch> patches_for(const Domain2D& dom) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return std::visit(
      [&](const auto& s) -> std::vector<Patch> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return {Patch{false, 0.0, s.x0, s.x1, s.y0, s.y1, 1.0}};
        } else if constexpr (std::is_same_v<T, Disk>) {
          return {Patch{true, s.center, 0.0, s.radius, 0.0, two_pi, 1.0}};
        } else if constexpr (std::is_same_v<T, Annulus>) {
          return {Patch{true, s.center, s.r_in, s.r_out, 0.0, two_pi, 1.0}};
        } else {
          std::vector<Patch> out{Patch{true, s.center, 0.0, s.radius, 0.0, two_pi, 1.0}};
          for (const auto& h : s.holes) out.push_back(Patch{true, h.point, 0.0, h.radius, 0.0, two_pi, -1.0});
          return out;
        }
      },
      dom.shape());
}

// Physical size of a cell (longest side in the plane).
inline double cell_size(const Patch& p, const Cell& c) {
  if (!p.polar) return std::max(c.u1 - c.u0, c.v1 - c.v0);
  return std::max(c.u1 - c.u0, c.u1 * (c.v1 - c.v0));
}

// Neumaier-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double result() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace detail

/// Adaptive integral of weight(f#(z)) over D, divided by pi. `weight` maps a
/// spherical-derivative value to the integrand (e.g. x -> x^2).
template <typename Weight>
QuadResult integrate_sph(const MeroFunc& f, const Domain2D& dom, double tol, Weight&& weight,
                         const QuadOptions& opt = {}) {
  if (!(tol > 0.0)) throw InvalidArgumentError("quadrature: tol must be positive");
  using detail::Cell;
  using detail::Patch;
  const auto& g7 = detail::gl7();
  const auto& g15 = detail::gl15();
  const std::vector<Patch> patches = detail::patches_for(dom);
  const double floor_size = opt.floor_fraction * dom.diameter();
  const unsigned threads = resolve_threads(opt.threads);

  auto integrand = [&](const Patch& p, double u, double v, double& sph) {
    if (!p.polar) {
      sph = f.sph_deriv(cplx(u, v));
      return weight(sph);
    }
    sph = f.sph_deriv(p.center + std::polar(u, v));
    return weight(sph) * u;
  };

  auto evaluate = [&](Cell& c) {
    const Patch& p = patches[static_cast<std::size_t>(c.patch)];
    const double hu = 0.5 * (c.u1 - c.u0), hv = 0.5 * (c.v1 - c.v0);
    const double mu = 0.5 * (c.u0 + c.u1), mv = 0.5 * (c.v0 + c.v1);
    double peak = 0.0, sph = 0.0;
    double s15 = 0.0;
    for (int i = 0; i < 15; ++i)
      for (int j = 0; j < 15; ++j) {
        const double val = integrand(p, mu + hu * g15.x[i], mv + hv * g15.x[j], sph);
        peak = std::max(peak, sph);
        s15 += g15.w[i] * g15.w[j] * val;
      }
    double s7 = 0.0;
    for (int i = 0; i < 7; ++i)
      for (int j = 0; j < 7; ++j) {
        const double val = integrand(p, mu + hu * g7.x[i], mv + hv * g7.x[j], sph);
        peak = std::max(peak, sph);
        s7 += g7.w[i] * g7.w[j] * val;
      }
    const double area = hu * hv;
    c.i15 = s15 * area;
    c.i7 = s7 * area;
    c.mid = integrand(p, mu, mv, sph) * 4.0 * area;
    c.peak = std::max(peak, sph);
  };

  // A cell must be split regardless of its error when it sits on a spike it
  // does not resolve.
  auto forced = [&](const Cell& c) {
    if (c.floored || c.peak <= opt.spike_threshold) return false;
    const double size = detail::cell_size(patches[static_cast<std::size_t>(c.patch)], c);
    return size * c.peak > 1.0;
  };

  std::vector<Cell> cells;
  long next_id = 0;
  for (std::size_t k = 0; k < patches.size(); ++k) {
    const Patch& p = patches[k];
    const int nu = 4, nv = p.polar ? 8 : 4;
    for (int j = 0; j < nv; ++j)
      for (int i = 0; i < nu; ++i) {
        Cell c{static_cast<int>(k), p.u0 + (p.u1 - p.u0) * i / nu, p.u0 + (p.u1 - p.u0) * (i + 1) / nu,
               p.v0 + (p.v1 - p.v0) * j / nv, p.v0 + (p.v1 - p.v0) * (j + 1) / nv};
        c.id = next_id++;
        cells.push_back(c);
      }
  }
  parallel_for(cells.size(), threads, [&](std::size_t i) { evaluate(cells[i]); });

  // Priority: forced cells first, then larger error; ties by id.
  auto key = [&](std::size_t i) {
    const Cell& c = cells[i];
    return std::make_tuple(forced(c) ? 1 : 0, c.err(), -c.id);
  };
  auto cmp = [&](std::size_t a, std::size_t b) { return key(a) < key(b); };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> queue(cmp);
  std::vector<bool> alive(cells.size(), true);
  double total_err = 0.0;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    queue.push(i);
    total_err += cells[i].err();
  }

  const double scaled_tol = tol * std::numbers::pi;
  long leaves = static_cast<long>(cells.size());
  constexpr std::size_t kBatch = 16;

  auto finish = [&](bool converged) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (alive[i]) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const Cell& x = cells[a];
      const Cell& y = cells[b];
      return std::tie(x.patch, x.v0, x.u0) < std::tie(y.patch, y.v0, y.u0);
    });
    detail::CompensatedSum val, err;
    for (std::size_t i : order) {
      val.add(patches[static_cast<std::size_t>(cells[i].patch)].sign * cells[i].value());
      err.add(cells[i].err());
    }
    QuadResult r;
    r.value = std::max(0.0, val.result()) / std::numbers::pi;
    r.error_estimate = err.result() / std::numbers::pi;
    r.cells = leaves;
    r.converged = converged && r.error_estimate <= tol;
    return r;
  };

  // Error carried by cells at the size floor; those leave the queue.
  double floor_err = 0.0;
  while (!queue.empty()) {
    const std::size_t top = queue.top();
    if (!forced(cells[top])) {
      if (total_err <= scaled_tol) break;
      if (total_err - floor_err <= 0.1 * scaled_tol) break;  // floor-limited
    }

    std::vector<std::size_t> batch;
    while (!queue.empty() && batch.size() < kBatch) {
      const std::size_t i = queue.top();
      if (!batch.empty() && !forced(cells[i]) && cells[i].err() == 0.0) break;
      queue.pop();
      batch.push_back(i);
    }

    std::vector<Cell> children;
    for (std::size_t i : batch) {
      const Cell& c = cells[i];
      const Patch& p = patches[static_cast<std::size_t>(c.patch)];
      if (detail::cell_size(p, c) * 0.5 < floor_size) {
        // Cannot split further: re-evaluate as a floor cell.
        Cell fc = c;
        fc.floored = true;
        total_err += fc.err() - c.err();
        floor_err += fc.err();
        cells[i] = fc;
        continue;
      }
      alive[i] = false;
      total_err -= c.err();
      --leaves;
      const double um = 0.5 * (c.u0 + c.u1), vm = 0.5 * (c.v0 + c.v1);
      const std::array<std::array<double, 4>, 4> quads{{{c.u0, um, c.v0, vm},
                                                        {um, c.u1, c.v0, vm},
                                                        {c.u0, um, vm, c.v1},
                                                        {um, c.u1, vm, c.v1}}};
      for (const auto& q : quads) {
        Cell child{c.patch, q[0], q[1], q[2], q[3]};
        child.id = next_id++;
        children.push_back(child);
      }
    }
    parallel_for(children.size(), threads, [&](std::size_t i) { evaluate(children[i]); });
    for (auto& ch : children) {
      cells.push_back(ch);
      alive.push_back(true);
      queue.push(cells.size() - 1);
      total_err += ch.err();
      ++leaves;
    }
    if (leaves > opt.max_cells) {
      throw BudgetExceededError("quadrature: cell budget exceeded", finish(false));
    }
    if (total_err < 0.0) total_err = 0.0;
  }
  return finish(true);
}

/// (1/pi) * integral over D of (f#)^s.
inline QuadResult ls_integral(const MeroFunc& f, const Domain2D& dom, double s, double tol,
                              const QuadOptions& opt = {}) {
  if (!(s > 0.0)) throw InvalidArgumentError("ls_integral: s must be positive");
  if (s == 2.0) return integrate_sph(f, dom, tol, [](double x) { return x * x; }, opt);
  return integrate_sph(f, dom, tol, [s](double x) { return std::pow(x, s); }, opt);
}

/// Spherical area of f(D) counted with multiplicity, in units of pi.
inline QuadResult spherical_area(const MeroFunc& f, const Domain2D& dom, double tol, const QuadOptions& opt = {}) {
  return ls_integral(f, dom, 2.0, tol, opt);
}

/// Areas over the dyadic annuli R/2^n < |z - z0| < R/2^(n-1), n = 1..levels.
inline std::vector<double> annulus_area_series(const MeroFunc& f, cplx z0, double radius, int levels,
                                               double tol = 1e-10, const QuadOptions& opt = {}) {
  if (levels < 1) throw InvalidArgumentError("annulus_area_series: levels must be >= 1");
  if (!(radius > 0.0)) throw InvalidArgumentError("annulus_area_series: radius must be positive");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(levels));
  double outer = radius;
  for (int n = 1; n <= levels; ++n) {
    const double inner = outer * 0.5;
    out.push_back(spherical_area(f, Domain2D::annulus(z0, inner, outer), tol, opt).value);
    outer = inner;
  }
  return out;
}

}  // namespace sphlab
