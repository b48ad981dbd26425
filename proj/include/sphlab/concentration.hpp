#pragma once

// Bubbling and mass concentration for families f_n.
//
// Irregular points are found from the growth of the local maxima of f_n#
// along the schedule: a cell whose local maximum grows like n^k with k > 0.5
// is flagged. Flagged cells are clustered, refined once on a 4x finer local
// grid, and each surviving cluster becomes one irregular point. Too many
// clusters, or a cluster wider than 10 coarse cells, means the non-normal set
// is not a finite set of points (NotQuasiNormal).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sphlab/domain.hpp"
#include "sphlab/errors.hpp"
#include "sphlab/funcmodel.hpp"
#include "sphlab/parallel.hpp"
#include "sphlab/quadrature.hpp"

namespace sphlab {

/// f# sampled on a res x res node grid over a bounding box, NaN outside D.
struct GridField {
  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  int resolution = 0;
  std::vector<double> values;  // row-major, row j has y = y0 + j*dy

  cplx node(int i, int j) const {
    return {x0 + (x1 - x0) * i / (resolution - 1), y0 + (y1 - y0) * j / (resolution - 1)};
  }
  double at(int i, int j) const { return values[static_cast<std::size_t>(j) * resolution + i]; }

  double max_value() const {
    double m = 0.0;
    for (double v : values)
      if (!std::isnan(v)) m = std::max(m, v);
    return m;
  }
};

inline GridField marty_field(const MeroFunc& f, const Domain2D& dom, int resolution, int threads = 0) {
  if (resolution < 8) throw ResolutionTooLowError("marty_field: resolution must be at least 8");
  const auto box = dom.bounding_box();
  GridField g{box.x0, box.x1, box.y0, box.y1, resolution, {}};
  g.values.assign(static_cast<std::size_t>(resolution) * resolution, std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<std::size_t>(resolution), resolve_threads(threads), [&](std::size_t j) {
    for (int i = 0; i < resolution; ++i) {
      const cplx z = g.node(i, static_cast<int>(j));
      if (dom.contains(z)) g.values[j * resolution + i] = f.sph_deriv(z);
    }
  });
  return g;
}

/// CSV: header line "x0,x1,y0,y1,resolution", its values, then one line per
/// grid row. Masked nodes are written as "nan".
inline std::string marty_field_csv(const GridField& g) {
  std::ostringstream os;
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("nan");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  os << "x0,x1,y0,y1,resolution\n"
     << num(g.x0) << ',' << num(g.x1) << ',' << num(g.y0) << ',' << num(g.y1) << ',' << g.resolution << '\n';
  for (int j = 0; j < g.resolution; ++j) {
    for (int i = 0; i < g.resolution; ++i) os << (i ? "," : "") << num(g.at(i, j));
    os << '\n';
  }
  return os.str();
}

struct WitnessEntry {
  int n = 0;
  cplx z;
  double sph_deriv = 0.0;
};

struct IrregularPoint {
  cplx location;
  double marty_growth_exponent = 0.0;
  std::vector<WitnessEntry> witness;
};

enum class DetectionStatus { Finite, NotQuasiNormal };

struct DetectionOptions {
  double growth_threshold = 0.5;
  int max_cluster_diameter = 10;  // coarse cells
  int refine_factor = 4;
  /// Overrides the family's declared area bound for the cluster-count test.
  std::optional<double> order_bound;
  int threads = 0;
};

struct DetectionResult {
  DetectionStatus status = DetectionStatus::Finite;
  std::vector<IrregularPoint> points;
  BoundingBox box{0, 0, 0, 0};
  int resolution = 0;
  std::vector<std::uint8_t> flagged;  // coarse cells, row-major
  std::vector<double> slopes;         // coarse cells, NaN when inactive
  int cluster_count = 0;
  double widest_cluster = 0.0;  // coarse cells, after refinement
  std::string reason;

  double cell_width() const { return box.width() / resolution; }
  double cell_height() const { return box.height() / resolution; }
  int flagged_count() const {
    int c = 0;
    for (auto v : flagged) c += v;
    return c;
  }
  /// True when some flagged coarse cell (closed) contains z.
  bool flagged_at(cplx z) const {
    const double fx = (z.real() - box.x0) / cell_width();
    const double fy = (z.imag() - box.y0) / cell_height();
    const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
    for (int j = j0 - 1; j <= j0 + 1; ++j)
      for (int i = i0 - 1; i <= i0 + 1; ++i) {
        if (i < 0 || j < 0 || i >= resolution || j >= resolution) continue;
        if (!flagged[static_cast<std::size_t>(j) * resolution + i]) continue;
        if (fx >= i - 1e-12 && fx <= i + 1 + 1e-12 && fy >= j - 1e-12 && fy <= j + 1 + 1e-12) return true;
      }
    return false;
  }
};

namespace detail {

// Compass search for the maximum of g over a box, starting at `start`.
template <typename G>
std::pair<cplx, double> maximize_in_box(G&& g, const BoundingBox& box, cplx start, double step, double min_step) {
  auto clamp = [&](cplx z) {
    return cplx(std::clamp(z.real(), box.x0, box.x1), std::clamp(z.imag(), box.y0, box.y1));
  };
  cplx best = clamp(start);
  double best_v = g(best);
  while (step >= min_step) {
    bool moved = false;
    for (const cplx d : {cplx(step, 0), cplx(-step, 0), cplx(0, step), cplx(0, -step)}) {
      const cplx z = clamp(best + d);
      const double v = g(z);
      if (v > best_v) {
        best_v = v;
        best = z;
        moved = true;
      }
    }
    if (!moved) step *= 0.5;
  }
  return {best, best_v};
}

// Local maximum of g over a cell: best of a 3x3 sample, then compass search.
template <typename G>
std::pair<cplx, double> cell_maximum(G&& g, const BoundingBox& cell) {
  cplx best;
  double best_v = -1.0;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) {
      const cplx z(cell.x0 + 0.5 * i * cell.width(), cell.y0 + 0.5 * j * cell.height());
      const double v = g(z);
      if (v > best_v) {
        best_v = v;
        best = z;
      }
    }
  const double w = std::max(cell.width(), cell.height());
  return maximize_in_box(g, cell, best, 0.25 * w, 1e-3 * w);
}

// Least-squares slope of y against x.
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sx += x[k];
    sy += y[k];
    sxx += x[k] * x[k];
    sxy += x[k] * y[k];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

// Growth exponent of the local maxima of f_n# over a cell; 0 when some
// maximum vanishes.
inline double cell_growth(const std::vector<MeroFunc>& members, const std::vector<double>& log_n,
                          const BoundingBox& cell) {
  std::vector<double> logs;
  logs.reserve(members.size());
  for (const auto& f : members) {
    const double v = cell_maximum([&](cplx z) { return f.sph_deriv(z); }, cell).second;
    if (!(v > 0.0) || !std::isfinite(v)) return 0.0;
    logs.push_back(std::log(v));
  }
  return ls_slope(log_n, logs);
}

struct CellGrid {
  BoundingBox box;
  int nx, ny;
  BoundingBox cell(int i, int j) const {
    const double w = box.width() / nx, h = box.height() / ny;
    return {box.x0 + i * w, box.x0 + (i + 1) * w, box.y0 + j * h, box.y0 + (j + 1) * h};
  }
  cplx center(int i, int j) const {
    const auto c = cell(i, j);
    return {0.5 * (c.x0 + c.x1), 0.5 * (c.y0 + c.y1)};
  }
};

// Growth slopes on every cell of `grid` whose center lies in D (NaN elsewhere).
inline std::vector<double> growth_slopes(const std::vector<MeroFunc>& members, const std::vector<double>& log_n,
                                         const CellGrid& grid, const Domain2D& dom, unsigned threads) {
  std::vector<double> slopes(static_cast<std::size_t>(grid.nx) * grid.ny, std::numeric_limits<double>::quiet_NaN());
  parallel_for(static_cast<std::size_t>(grid.ny), threads, [&](std::size_t j) {
    for (int i = 0; i < grid.nx; ++i) {
      if (!dom.contains(grid.center(i, static_cast<int>(j)))) continue;
      slopes[j * grid.nx + i] = cell_growth(members, log_n, grid.cell(i, static_cast<int>(j)));
    }
  });
  return slopes;
}

// 8-connected components of the true cells of a mask.
inline std::vector<std::vector<std::pair<int, int>>> components(const std::vector<std::uint8_t>& mask, int nx,
                                                                int ny) {
  std::vector<int> seen(mask.size(), 0);
  std::vector<std::vector<std::pair<int, int>>> out;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * nx + i;
      if (!mask[k] || seen[k]) continue;
      std::vector<std::pair<int, int>> comp;
      std::vector<std::pair<int, int>> stack{{i, j}};
      seen[k] = 1;
      while (!stack.empty()) {
        const auto [ci, cj] = stack.back();
        stack.pop_back();
        comp.emplace_back(ci, cj);
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int ni = ci + di, nj = cj + dj;
            if (ni < 0 || nj < 0 || ni >= nx || nj >= ny) continue;
            const std::size_t nk = static_cast<std::size_t>(nj) * nx + ni;
            if (mask[nk] && !seen[nk]) {
              seen[nk] = 1;
              stack.emplace_back(ni, nj);
            }
          }
      }
      out.push_back(std::move(comp));
    }
  return out;
}

inline int extent(const std::vector<std::pair<int, int>>& comp) {
  int i0 = comp[0].first, i1 = i0, j0 = comp[0].second, j1 = j0;
  for (const auto& [i, j] : comp) {
    i0 = std::min(i0, i);
    i1 = std::max(i1, i);
    j0 = std::min(j0, j);
    j1 = std::max(j1, j);
  }
  return std::max(i1 - i0, j1 - j0) + 1;
}

inline std::vector<double> log_indices(const std::vector<int>& idx) {
  std::vector<double> out;
  for (int n : idx) out.push_back(std::log(static_cast<double>(n)));
  return out;
}

}  // namespace detail

/// Locates the irregular (bubble) points of a family on D.
inline DetectionResult detect_irregular_points(const FamilySpec& fam, const Domain2D& dom, int resolution,
                                               const DetectionOptions& opt = {}) {
  if (fam.indices.size() < 4) throw ScheduleTooShortError("detect_irregular_points: need at least 4 indices");
  if (resolution < 8) throw ResolutionTooLowError("detect_irregular_points: resolution must be at least 8");
  const unsigned threads = resolve_threads(opt.threads);

  std::vector<MeroFunc> members;
  for (int n : fam.indices) members.push_back(fam.at(n));
  const std::vector<double> log_n = detail::log_indices(fam.indices);

  DetectionResult res;
  res.box = dom.bounding_box();
  res.resolution = resolution;
  const detail::CellGrid coarse{res.box, resolution, resolution};
  res.slopes = detail::growth_slopes(members, log_n, coarse, dom, threads);
  res.flagged.assign(res.slopes.size(), 0);
  for (std::size_t k = 0; k < res.slopes.size(); ++k)
    res.flagged[k] = !std::isnan(res.slopes[k]) && res.slopes[k] > opt.growth_threshold;

  const double cw = res.cell_width(), ch = res.cell_height();
  const int rf = opt.refine_factor;
  struct FineCluster {
    cplx seed;
    double seed_value;
  };
  std::vector<FineCluster> clusters;

  for (const auto& comp : detail::components(res.flagged, resolution, resolution)) {
    int i0 = resolution, i1 = -1, j0 = resolution, j1 = -1;
    for (const auto& [i, j] : comp) {
      i0 = std::min(i0, i);
      i1 = std::max(i1, i);
      j0 = std::min(j0, j);
      j1 = std::max(j1, j);
    }
    i0 = std::max(0, i0 - 1);
    j0 = std::max(0, j0 - 1);
    i1 = std::min(resolution - 1, i1 + 1);
    j1 = std::min(resolution - 1, j1 + 1);
    const detail::CellGrid fine{{res.box.x0 + i0 * cw, res.box.x0 + (i1 + 1) * cw, res.box.y0 + j0 * ch,
                                 res.box.y0 + (j1 + 1) * ch},
                                (i1 - i0 + 1) * rf,
                                (j1 - j0 + 1) * rf};
    const auto slopes = detail::growth_slopes(members, log_n, fine, dom, threads);
    std::vector<std::uint8_t> mask(slopes.size(), 0);
    for (std::size_t k = 0; k < slopes.size(); ++k)
      mask[k] = !std::isnan(slopes[k]) && slopes[k] > opt.growth_threshold;

    for (const auto& fc : detail::components(mask, fine.nx, fine.ny)) {
      res.widest_cluster = std::max(res.widest_cluster, static_cast<double>(detail::extent(fc)) / rf);
      FineCluster best{0.0, -1.0};
      for (const auto& [i, j] : fc) {
        const auto [z, v] =
            detail::cell_maximum([&](cplx w) { return members.back().sph_deriv(w); }, fine.cell(i, j));
        if (v > best.seed_value) best = {z, v};
      }
      clusters.push_back(best);
    }
  }
  res.cluster_count = static_cast<int>(clusters.size());

  const std::optional<double> bound = opt.order_bound ? opt.order_bound : fam.area_bound;
  if (bound && res.cluster_count > static_cast<int>(std::floor(*bound))) {
    res.status = DetectionStatus::NotQuasiNormal;
    res.reason = "more flagged clusters than the order bound allows";
    return res;
  }
  if (res.widest_cluster > opt.max_cluster_diameter) {
    res.status = DetectionStatus::NotQuasiNormal;
    res.reason = "flagged cluster wider than " + std::to_string(opt.max_cluster_diameter) + " cells";
    return res;
  }

  const double fine_w = std::max(cw, ch) / rf;
  for (const auto& cl : clusters) {
    IrregularPoint pt;
    // Polish the location on the last member.
    const BoundingBox near{cl.seed.real() - fine_w, cl.seed.real() + fine_w, cl.seed.imag() - fine_w,
                           cl.seed.imag() + fine_w};
    pt.location = detail::maximize_in_box([&](cplx w) { return members.back().sph_deriv(w); }, near, cl.seed,
                                          0.25 * fine_w, 1e-13)
                      .first;
    // Witness chain: local maximizer of each member near the location.
    const BoundingBox hood{pt.location.real() - std::max(cw, ch), pt.location.real() + std::max(cw, ch),
                           pt.location.imag() - std::max(cw, ch), pt.location.imag() + std::max(cw, ch)};
    std::vector<double> logs;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto [z, v] = detail::maximize_in_box([&](cplx w) { return members[k].sph_deriv(w); }, hood,
                                                   pt.location, 0.25 * fine_w, 1e-13);
      pt.witness.push_back({fam.indices[k], z, v});
      logs.push_back(std::log(std::max(v, std::numeric_limits<double>::min())));
    }
    pt.marty_growth_exponent = detail::ls_slope(log_n, logs);
    res.points.push_back(std::move(pt));
  }
  std::sort(res.points.begin(), res.points.end(), [](const IrregularPoint& a, const IrregularPoint& b) {
    return std::make_pair(a.location.real(), a.location.imag()) < std::make_pair(b.location.real(), b.location.imag());
  });
  return res;
}

struct MassEstimate {
  double alpha = 0.0;
  double uncertainty = 0.0;
  std::vector<double> eps;
  std::vector<double> corrected;  // per-eps disk mass after n-extrapolation and residual removal
};

namespace detail {

// Two-point Richardson extrapolation n -> infinity for errors ~ n^-2.
inline double richardson(int n1, double a1, int n2, double a2) {
  const double s1 = static_cast<double>(n1) * n1, s2 = static_cast<double>(n2) * n2;
  return (s2 * a2 - s1 * a1) / (s2 - s1);
}

}  // namespace detail

/// Concentration mass alpha_p at p, in units of pi.
inline MassEstimate estimate_mass(const FamilySpec& fam, cplx p, const std::vector<double>& eps_schedule,
                                  const Domain2D& dom, double tol = 1e-9) {
  if (eps_schedule.size() < 3) throw InvalidArgumentError("estimate_mass: need at least 3 radii");
  for (std::size_t k = 0; k < eps_schedule.size(); ++k) {
    if (!(eps_schedule[k] > 0.0) || (k > 0 && eps_schedule[k] >= eps_schedule[k - 1])) {
      throw InvalidArgumentError("estimate_mass: radii must be positive and decreasing");
    }
  }
  if (fam.indices.size() < 2) throw ScheduleTooShortError("estimate_mass: need at least 2 indices");
  if (!dom.contains(p) || dom.distance_to_boundary(p) < eps_schedule.front()) {
    throw InvalidArgumentError("estimate_mass: p must lie in D with margin >= the largest radius");
  }

  const int n1 = fam.indices[fam.indices.size() - 2];
  const int n2 = fam.indices.back();
  const MeroFunc f1 = fam.at(n1), f2 = fam.at(n2);

  MassEstimate out;
  out.eps = eps_schedule;
  double extrapolation = 0.0;  // largest n-extrapolation step
  for (double e : eps_schedule) {
    const auto disk = Domain2D::disk(p, e);
    const auto ring = Domain2D::annulus(p, e, 2.0 * e);
    const double a2 = spherical_area(f2, disk, tol).value;
    const double a = detail::richardson(n1, spherical_area(f1, disk, tol).value, n2, a2);
    extrapolation = std::max(extrapolation, std::abs(a - a2));
    // The limit density seen on the ring eps < |z-p| < 2 eps, scaled to the disk.
    const double r = detail::richardson(n1, spherical_area(f1, ring, tol).value, n2, spherical_area(f2, ring, tol).value);
    out.corrected.push_back(a - std::max(0.0, r) / 3.0);
  }

  // Linear fit in eps, intercept at eps = 0.
  const double slope = detail::ls_slope(out.eps, out.corrected);
  double mean_e = 0.0, mean_a = 0.0;
  for (std::size_t k = 0; k < out.eps.size(); ++k) {
    mean_e += out.eps[k];
    mean_a += out.corrected[k];
  }
  mean_e /= static_cast<double>(out.eps.size());
  mean_a /= static_cast<double>(out.eps.size());
  out.alpha = mean_a - slope * mean_e;
  const auto [lo, hi] = std::minmax_element(out.corrected.begin(), out.corrected.end());
  out.uncertainty = std::max(*hi - *lo, extrapolation);

  if (out.alpha + out.uncertainty < 1.0 || out.uncertainty > 0.25) {
    throw NotConcentratedError("estimate_mass: no concentrated mass >= 1 at the given point");
  }
  return out;
}

enum class LimitStatus { Converged, NotConverged };

struct LimitProbe {
  cplx z;
  SpherePoint value;     // last member
  SpherePoint previous;  // second to last member
  double gap = 0.0;      // chordal distance between the two
  LimitStatus status = LimitStatus::Converged;
};

/// Limit of the family at probe points away from S, read off the last two
/// members.
inline std::vector<LimitProbe> limit_off_S(const FamilySpec& fam, const Domain2D& dom, const std::vector<cplx>& S,
                                           const std::vector<cplx>& probes) {
  if (fam.indices.size() < 2) throw ScheduleTooShortError("limit_off_S: need at least 2 indices");
  for (const auto& z : probes) {
    bool ok = dom.contains(z) && dom.distance_to_boundary(z) >= 0.05;
    for (const auto& s : S) ok = ok && std::abs(z - s) >= 0.05;
    if (!ok) throw InvalidArgumentError("limit_off_S: probe closer than 0.05 to S or to the boundary");
  }
  const MeroFunc prev = fam.at(fam.indices[fam.indices.size() - 2]);
  const MeroFunc last = fam.at(fam.indices.back());
  std::vector<LimitProbe> out;
  for (const auto& z : probes) {
    LimitProbe lp{z, last.value(z), prev.value(z)};
    lp.gap = chordal_distance(lp.value, lp.previous);
    lp.status = lp.gap > 0.01 ? LimitStatus::NotConverged : LimitStatus::Converged;
    out.push_back(lp);
  }
  return out;
}

struct MassEntry {
  cplx location;
  double alpha = 0.0;
  double uncertainty = 0.0;
  bool quantized = false;
};

struct MassProfile {
  DetectionStatus status = DetectionStatus::Finite;
  std::vector<IrregularPoint> S;
  std::vector<MassEntry> masses;  // aligned with S
  double residual_area = 0.0;
  double order_bound = 0.0;
  DetectionResult detection;
};

/// True where |alpha - nearest integer| <= max(tol, uncertainty).
inline std::vector<std::pair<cplx, bool>> quantization_check(const MassProfile& profile, double tol) {
  std::vector<std::pair<cplx, bool>> out;
  for (const auto& m : profile.masses) {
    out.emplace_back(m.location, std::abs(m.alpha - std::round(m.alpha)) <= std::max(tol, m.uncertainty));
  }
  return out;
}

struct ProfileOptions {
  int resolution = 64;
  std::vector<double> eps_schedule{0.2, 0.1, 0.05};
  double quantization_tol = 0.05;
  std::optional<double> order_bound;
  int threads = 0;
};

/// detect -> estimate_mass at each point -> residual area -> quantization.
inline MassProfile build_mass_profile(const FamilySpec& fam, const Domain2D& dom, const ProfileOptions& opt = {}) {
  DetectionOptions dopt;
  dopt.order_bound = opt.order_bound;
  dopt.threads = opt.threads;
  MassProfile prof;
  prof.order_bound = opt.order_bound.value_or(fam.area_bound.value_or(std::numeric_limits<double>::infinity()));
  prof.detection = detect_irregular_points(fam, dom, opt.resolution, dopt);
  prof.status = prof.detection.status;
  if (prof.status == DetectionStatus::NotQuasiNormal) return prof;
  prof.S = prof.detection.points;

  // Radii must fit in D and keep the holes around distinct points disjoint.
  std::vector<double> eps = opt.eps_schedule;
  double limit = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < prof.S.size(); ++a) {
    limit = std::min(limit, dom.distance_to_boundary(prof.S[a].location));
    for (std::size_t b = a + 1; b < prof.S.size(); ++b)
      limit = std::min(limit, 0.5 * std::abs(prof.S[a].location - prof.S[b].location));
  }
  if (!eps.empty() && eps.front() > limit) {
    const double scale = limit / eps.front();
    for (auto& e : eps) e *= scale;
  }

  for (const auto& pt : prof.S) {
    const MassEstimate me = estimate_mass(fam, pt.location, eps, dom);
    prof.masses.push_back({pt.location, me.alpha, me.uncertainty, false});
  }
  const auto q = quantization_check(prof, opt.quantization_tol);
  for (std::size_t k = 0; k < q.size(); ++k) prof.masses[k].quantized = q[k].second;

  // Mass left outside the smallest holes, extrapolated in n.
  const int n1 = fam.indices[fam.indices.size() - 2], n2 = fam.indices.back();
  auto outside = [&](int n) {
    const MeroFunc f = fam.at(n);
    double a = spherical_area(f, dom, 1e-9).value;
    for (const auto& pt : prof.S) a -= spherical_area(f, Domain2D::disk(pt.location, eps.back()), 1e-9).value;
    return a;
  };
  prof.residual_area = std::max(0.0, detail::richardson(n1, outside(n1), n2, outside(n2)));
  return prof;
}

}  // namespace sphlab
