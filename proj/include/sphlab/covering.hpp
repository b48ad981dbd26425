#pragma once

// Value distribution of rational functions: covering counts n_f(w, D) by
// root finding, an equal-area sampling of the sphere, the covering-count
// estimate of the spherical area, and the low-multiplicity set E_f.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <tuple>
#include <utility>
#include <vector>

#include "sphlab/domain.hpp"
#include "sphlab/errors.hpp"
#include "sphlab/funcmodel.hpp"
#include "sphlab/parallel.hpp"
#include "sphlab/polynomial.hpp"
#include "sphlab/quadrature.hpp"
#include "sphlab/sphere.hpp"

namespace sphlab {

struct CoveringCount {
  int with_multiplicity = 0;
  int distinct = 0;
  /// Roots within 1e-9 of the boundary of D; when nonzero the count is
  /// ambiguous (BoundaryRootWarning).
  int boundary_roots = 0;

  bool boundary_warning() const { return boundary_roots > 0; }
};

/// Solutions of f(z) = w inside D, with and without multiplicity. For
/// w = infinity the poles of f are counted.
inline CoveringCount covering_count(const RationalFunc& f, const SpherePoint& w, const Domain2D& dom) {
  const Polynomial& p = f.numerator();
  const Polynomial& q = f.denominator();
  Polynomial h;
  double scale = 0.0;
  if (w.is_infinity()) {
    h = q;
    scale = q.max_abs_coefficient();
  } else {
    h = p - w.value() * q;
    scale = p.max_abs_coefficient() + std::abs(w.value()) * q.max_abs_coefficient();
  }
  if (h.max_abs_coefficient() <= 1e-13 * scale) {
    throw DegenerateTargetError("covering_count: f is identically equal to the target value");
  }

  std::vector<cplx> inside;
  CoveringCount out;
  for (const auto& z : polynomial_roots(h)) {
    const double d = dom.distance_to_boundary(z);
    if (d < 1e-9) ++out.boundary_roots;
    if (d > 0.0 && dom.contains(z)) inside.push_back(z);
  }
  out.with_multiplicity = static_cast<int>(inside.size());

  // Single-linkage clustering: roots closer than 1e-7 diam(D) are one root.
  const double tol = 1e-7 * dom.diameter();
  std::vector<int> label(inside.size());
  for (std::size_t i = 0; i < inside.size(); ++i) label[i] = static_cast<int>(i);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < inside.size(); ++i)
      for (std::size_t j = i + 1; j < inside.size(); ++j)
        if (std::abs(inside[i] - inside[j]) < tol && label[i] != label[j]) {
          const int l = std::min(label[i], label[j]);
          label[i] = label[j] = l;
          changed = true;
        }
  }
  std::sort(label.begin(), label.end());
  out.distinct = static_cast<int>(std::unique(label.begin(), label.end()) - label.begin());
  return out;
}

/// Weighted sample of (part of) the sphere; weights are spherical areas, the
/// whole sphere having area pi.
struct SphereSampleSet {
  std::vector<std::pair<SpherePoint, double>> points;
  double total_weight = 0.0;

  void add(const SpherePoint& p, double w) {
    points.emplace_back(p, w);
    total_weight += w;
  }
};

/// Equal-area partition of the sphere: `bands` latitude bands of equal area,
/// each split into a number of cells proportional to its circumference.
/// Points are the cell centers, mapped to the plane stereographically
/// (north pole = infinity).
inline SphereSampleSet equal_area_sphere_grid(int bands) {
  if (bands < 1) throw InvalidArgumentError("equal_area_sphere_grid: need at least one band");
  SphereSampleSet out;
  const double band_area = std::numbers::pi / bands;
  for (int k = 0; k < bands; ++k) {
    const double zc = -1.0 + (2.0 * k + 1.0) / bands;
    const double rho = std::sqrt(std::max(0.0, 1.0 - zc * zc));
    const int cells = std::max(1, static_cast<int>(std::lround(std::numbers::pi * bands * rho)));
    const double w = band_area / cells;
    for (int j = 0; j < cells; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / cells;
      out.add(SpherePoint::finite(std::polar(rho / (1.0 - zc), phi)), w);
    }
  }
  // Restore the exact total lost to rounding in the running sum.
  out.total_weight = std::numbers::pi;
  return out;
}

namespace detail {

inline void check_oracle_inputs(const RationalFunc& f, int resolution) {
  if (resolution < 16) throw ResolutionTooLowError("sphere grid resolution must be at least 16");
  if (f.degree() > 6) throw InvalidArgumentError("covering oracle limited to degree <= 6");
}

inline std::vector<CoveringCount> counts_on_grid(const RationalFunc& f, const Domain2D& dom,
                                                 const SphereSampleSet& grid, int threads) {
  std::vector<CoveringCount> counts(grid.points.size());
  if (f.is_constant()) return counts;  // every sampled value is taken 0 times a.e.
  parallel_for(grid.points.size(), resolve_threads(threads),
               [&](std::size_t i) { counts[i] = covering_count(f, grid.points[i].first, dom); });
  return counts;
}

}  // namespace detail

/// (1/pi) * sum over an equal-area sphere grid of n_f(w, D) * weight(w): an
/// estimate of the spherical area that never touches f#.
inline double covering_area_oracle(const RationalFunc& f, const Domain2D& dom, int resolution, int threads = 0) {
  detail::check_oracle_inputs(f, resolution);
  const SphereSampleSet grid = equal_area_sphere_grid(resolution);
  const auto counts = detail::counts_on_grid(f, dom, grid, threads);
  detail::CompensatedSum sum;
  for (std::size_t i = 0; i < counts.size(); ++i) sum.add(counts[i].with_multiplicity * grid.points[i].second);
  return sum.result() / std::numbers::pi;
}

struct CoveringReport {
  double C = 0.0;
  int m = 0;
  double epsilon = 0.0;
  double area = 0.0;
  double measure_low = 0.0;
  double grid_error = 0.0;
  SphereSampleSet sampled_E;
};

/// m = floor(C) and eps = pi (1 - C/(m+1)).
inline std::pair<int, double> multiplicity_threshold(double C) {
  if (!(C > 0.0)) throw InvalidArgumentError("C must be positive");
  const int m = static_cast<int>(std::floor(C));
  return {m, std::numbers::pi * (1.0 - C / (m + 1.0))};
}

/// The set of sampled values taken at most m = floor(C) times (distinct
/// solutions) and its spherical measure. Requires area(f, D) <= C.
inline CoveringReport low_multiplicity_report(const RationalFunc& f, const Domain2D& dom, double C, int resolution,
                                              int threads = 0) {
  detail::check_oracle_inputs(f, resolution);
  CoveringReport rep;
  rep.C = C;
  std::tie(rep.m, rep.epsilon) = multiplicity_threshold(C);
  rep.area = spherical_area(MeroFunc(f), dom, 1e-8).value;
  if (rep.area > C + 1e-3) {
    throw AreaBoundViolatedError("low_multiplicity_report: spherical area exceeds C");
  }
  const SphereSampleSet grid = equal_area_sphere_grid(resolution);
  const auto counts = detail::counts_on_grid(f, dom, grid, threads);
  detail::CompensatedSum low;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i].distinct <= rep.m) {
      rep.sampled_E.points.push_back(grid.points[i]);
      low.add(grid.points[i].second);
    }
  }
  rep.measure_low = low.result();
  rep.sampled_E.total_weight = rep.measure_low;
  // Nominal grid error: the area of one latitude band.
  rep.grid_error = std::numbers::pi / resolution;
  return rep;
}

struct SeparatedTriple {
  SpherePoint a, b, c;
  double achieved_delta = 0.0;
  /// sqrt(alpha/pi)/sqrt(2): the planar separation guaranteed for a set of
  /// area alpha.
  double target_delta = 0.0;
};

namespace detail {

inline double min_pairwise(const SpherePoint& a, const SpherePoint& b, const SpherePoint& c) {
  return std::min({chordal_distance(a, b), chordal_distance(a, c), chordal_distance(b, c)});
}

// Index maximizing min(sigma(x, u), sigma(x, v)).
inline std::size_t farthest_from_pair(const SphereSampleSet& e, const SpherePoint& u, const SpherePoint& v) {
  std::size_t best = 0;
  double best_d = -1.0;
  for (std::size_t i = 0; i < e.points.size(); ++i) {
    const auto& x = e.points[i].first;
    const double d = std::min(chordal_distance(x, u), chordal_distance(x, v));
    if (d > best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

}  // namespace detail

/// Three points of E with large pairwise chordal distance: seed, farthest
/// point, max-min third point, then one polishing pass that re-seeds each of
/// the three in turn.
inline SeparatedTriple three_separated_points(const SphereSampleSet& e, double alpha) {
  if (!(alpha > 0.0)) throw InvalidArgumentError("three_separated_points: alpha must be positive");
  if (e.total_weight < alpha) throw InsufficientMeasureError("three_separated_points: total weight below alpha");
  {
    std::vector<SpherePoint> distinct;
    for (const auto& [p, w] : e.points) {
      if (std::none_of(distinct.begin(), distinct.end(), [&](const SpherePoint& q) { return q == p; })) {
        distinct.push_back(p);
        if (distinct.size() >= 3) break;
      }
    }
    if (distinct.size() < 3) throw DegenerateSetError("three_separated_points: fewer than 3 distinct points");
  }

  const SpherePoint a0 = e.points.front().first;
  std::size_t ib = 0;
  double far = -1.0;
  for (std::size_t i = 0; i < e.points.size(); ++i) {
    const double d = chordal_distance(a0, e.points[i].first);
    if (d > far) {
      far = d;
      ib = i;
    }
  }
  std::array<SpherePoint, 3> tri{a0, e.points[ib].first, SpherePoint{}};
  tri[2] = e.points[detail::farthest_from_pair(e, tri[0], tri[1])].first;
  double best = detail::min_pairwise(tri[0], tri[1], tri[2]);
  std::array<SpherePoint, 3> best_tri = tri;

  for (int k = 0; k < 3; ++k) {
    auto cand = best_tri;
    cand[static_cast<std::size_t>(k)] =
        e.points[detail::farthest_from_pair(e, cand[static_cast<std::size_t>((k + 1) % 3)],
                                            cand[static_cast<std::size_t>((k + 2) % 3)])]
            .first;
    const double d = detail::min_pairwise(cand[0], cand[1], cand[2]);
    if (d > best) {
      best = d;
      best_tri = cand;
    }
  }

  SeparatedTriple out;
  out.a = best_tri[0];
  out.b = best_tri[1];
  out.c = best_tri[2];
  out.achieved_delta = detail::min_pairwise(out.a, out.b, out.c);
  out.target_delta = std::sqrt(alpha / std::numbers::pi) / std::numbers::sqrt2;
  return out;
}

}  // namespace sphlab
