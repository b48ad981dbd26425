#pragma once

// Schwarz-type bounds for the spherical derivative on the unit disk, and a
// grid sweep that checks concrete functions against them.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sphlab/errors.hpp"
#include "sphlab/funcmodel.hpp"
#include "sphlab/quadrature.hpp"

namespace sphlab {

/// (3 - sqrt 5)/2: the constant that can replace 1 in
/// limsup_{|z|->1} (1-|z|^2)^2 f#(z) <= 1/c. Exposed only, not verified.
inline constexpr double kRefinedAsymptoticConstant = (3.0 - 2.2360679774997896964) / 2.0;

namespace detail {

inline double one_minus_r2(cplx z) {
  const double r2 = std::norm(z);
  if (!(r2 < 1.0)) throw OutsideDiskError("point is not inside the unit disk");
  return 1.0 - r2;
}

inline void check_lower_bound_param(double c) {
  if (!(c > 0.0 && c <= 0.5)) throw ParameterRangeError("c must satisfy 0 < c <= 1/2 (L_c(D) is empty otherwise)");
}

}  // namespace detail

/// Density 1/(1 - |z|^2) of the curvature -4 hyperbolic metric on the disk.
inline double poincare_density_disk(cplx z) { return 1.0 / detail::one_minus_r2(z); }

inline double dufresnoy_yamashita_bound(double C, cplx z) {
  if (!(C > 0.0 && C < 1.0)) throw ParameterRangeError("area bound C must satisfy 0 < C < 1");
  return std::sqrt(C / (1.0 - C)) * poincare_density_disk(z);
}

inline double steinmetz_bound(double c, cplx z) {
  detail::check_lower_bound_param(c);
  const double t = detail::one_minus_r2(z);
  return 1.0 / (c * t * t);
}

inline double fkr_bound(double c, cplx z) {
  detail::check_lower_bound_param(c);
  const double t = detail::one_minus_r2(z);
  const double t2 = t * t;
  return (1.0 + std::sqrt(1.0 - 4.0 * c * c * t2)) / (2.0 * c * t2);
}

/// max of f#(0) over L_c(D).
inline double extremal_sharp_at_zero(double c) {
  detail::check_lower_bound_param(c);
  return (1.0 + std::sqrt(1.0 - 4.0 * c * c)) / (2.0 * c);
}

/// Grid minimum of f# over concentric rings up to |z| = 1 - 1e-3: an upper
/// estimate of inf f# on the disk.
inline double min_spherical_derivative(const MeroFunc& f, int resolution = 64) {
  if (resolution < 2) throw ResolutionTooLowError("min_spherical_derivative: resolution must be at least 2");
  const double rmax = 1.0 - 1e-3;
  double m = f.sph_deriv(0.0);
  for (int k = 1; k < resolution; ++k) {
    const double r = rmax * k / (resolution - 1);
    const int na = 2 * resolution;
    for (int a = 0; a < na; ++a) m = std::min(m, f.sph_deriv(std::polar(r, 2.0 * std::numbers::pi * a / na)));
  }
  return m;
}

enum class BoundKind { Dufresnoy, Steinmetz, Fkr };

struct BoundSpec {
  BoundKind kind;
  double parameter;  // C for Dufresnoy, c otherwise

  static BoundSpec dufresnoy(double C) { return {BoundKind::Dufresnoy, C}; }
  static BoundSpec steinmetz(double c) { return {BoundKind::Steinmetz, c}; }
  static BoundSpec fkr(double c) { return {BoundKind::Fkr, c}; }

  std::string name() const {
    switch (kind) {
      case BoundKind::Dufresnoy: return "dufresnoy";
      case BoundKind::Steinmetz: return "steinmetz";
      case BoundKind::Fkr: return "fkr";
    }
    return {};
  }
  std::string parameter_name() const { return kind == BoundKind::Dufresnoy ? "C" : "c"; }

  double operator()(cplx z) const {
    switch (kind) {
      case BoundKind::Dufresnoy: return dufresnoy_yamashita_bound(parameter, z);
      case BoundKind::Steinmetz: return steinmetz_bound(parameter, z);
      case BoundKind::Fkr: return fkr_bound(parameter, z);
    }
    return 0.0;
  }
};

struct BoundViolation {
  cplx z;
  double sph_deriv;
  double bound;
};

struct BoundReport {
  std::string bound_name;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<BoundViolation> grid_violations;
  double max_ratio = 0.0;
  long grid_points = 0;
  /// Hypothesis quantity that was checked (area, or min f#).
  double hypothesis_value = 0.0;
};

/// Sweeps f#/bound over `resolution` radii spaced geometrically toward the
/// boundary (1 - r from 1 down to 1e-3) times 2*resolution angles.
/// Hypotheses are checked first with 1e-3 slack: area(f, D) <= C for
/// Dufresnoy, min f# >= c for Steinmetz/FKR.
inline BoundReport verify_bound(const MeroFunc& f, const BoundSpec& bound, int resolution = 64) {
  if (resolution < 2) throw ResolutionTooLowError("verify_bound: resolution must be at least 2");
  BoundReport rep;
  rep.bound_name = bound.name();
  rep.parameters = {{bound.parameter_name(), bound.parameter}, {"resolution", resolution}};
  (void)bound(0.0);  // parameter range check

  if (bound.kind == BoundKind::Dufresnoy) {
    rep.hypothesis_value = spherical_area(f, Domain2D::unit_disk(), 1e-8).value;
    if (rep.hypothesis_value > bound.parameter + 1e-3) {
      throw HypothesisViolatedError("verify_bound: spherical area exceeds C");
    }
  } else {
    rep.hypothesis_value = min_spherical_derivative(f, resolution);
    if (rep.hypothesis_value < bound.parameter - 1e-3) {
      throw HypothesisViolatedError("verify_bound: f# drops below c on the disk");
    }
  }

  const int na = 2 * resolution;
  for (int k = 0; k < resolution; ++k) {
    const double r = 1.0 - std::pow(1e-3, static_cast<double>(k) / (resolution - 1));
    const int angles = k == 0 ? 1 : na;
    for (int a = 0; a < angles; ++a) {
      const cplx z = std::polar(r, 2.0 * std::numbers::pi * a / na);
      const double s = f.sph_deriv(z);
      const double b = bound(z);
      const double ratio = s / b;
      rep.max_ratio = std::max(rep.max_ratio, ratio);
      ++rep.grid_points;
      if (ratio > 1.0 + 1e-6) rep.grid_violations.push_back({z, s, b});
    }
  }
  return rep;
}

}  // namespace sphlab
