#pragma once

// Riemann sphere geometry. The chordal metric is normalized to diameter 1,
// so the whole sphere has area pi and f# = |f'| / (1 + |f|^2).

#include <cmath>
#include <complex>
#include <ostream>

#include "sphlab/errors.hpp"

namespace sphlab {

using cplx = std::complex<double>;

/// A point of the extended complex plane. Infinity is explicit, never a
/// large finite value.
class SpherePoint {
 public:
  SpherePoint() = default;

  static SpherePoint finite(cplx z) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw InvalidArgumentError("SpherePoint::finite: non-finite value");
    }
    SpherePoint p;
    p.value_ = z;
    return p;
  }

  static SpherePoint infinity() {
    SpherePoint p;
    p.infinite_ = true;
    return p;
  }

  /// Maps a quotient num/den to the sphere; den == 0 (or overflow) is infinity.
  static SpherePoint from_ratio(cplx num, cplx den) {
    if (den == cplx(0.0)) {
      return infinity();
    }
    const cplx q = num / den;
    if (!std::isfinite(q.real()) || !std::isfinite(q.imag())) {
      return infinity();
    }
    return finite(q);
  }

  bool is_infinity() const { return infinite_; }
  bool is_finite() const { return !infinite_; }

  cplx value() const {
    if (infinite_) {
      throw InvalidArgumentError("SpherePoint::value: point at infinity");
    }
    return value_;
  }

  /// The reciprocal 1/p, with 0 <-> infinity.
  SpherePoint reciprocal() const {
    if (infinite_) return finite(cplx(0.0));
    if (value_ == cplx(0.0)) return infinity();
    return from_ratio(cplx(1.0), value_);
  }

  friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
    if (a.infinite_ || b.infinite_) return a.infinite_ == b.infinite_;
    return a.value_ == b.value_;
  }

  friend std::ostream& operator<<(std::ostream& os, const SpherePoint& p) {
    if (p.infinite_) return os << "inf";
    return os << p.value_;
  }

 private:
  cplx value_{0.0, 0.0};
  bool infinite_ = false;
};

/// Chordal distance sigma on the sphere of diameter 1, in [0, 1].
inline double chordal_distance(const SpherePoint& a, const SpherePoint& b) {
  if (a.is_infinity() && b.is_infinity()) return 0.0;
  if (a.is_infinity()) return 1.0 / std::hypot(1.0, std::abs(b.value()));
  if (b.is_infinity()) return 1.0 / std::hypot(1.0, std::abs(a.value()));
  cplx z = a.value();
  cplx w = b.value();
  // sigma(z, w) = sigma(1/z, 1/w); use the inverted pair when both are large
  // to keep the products in range.
  if (std::abs(z) > 1.0 && std::abs(w) > 1.0) {
    z = 1.0 / z;
    w = 1.0 / w;
  }
  const double d = std::abs(z - w) / (std::hypot(1.0, std::abs(z)) * std::hypot(1.0, std::abs(w)));
  return std::min(d, 1.0);
}

inline double chordal_distance(cplx a, cplx b) {
  return chordal_distance(SpherePoint::finite(a), SpherePoint::finite(b));
}

/// Sphere rotation T(z) = phase * (z - a) / (1 + conj(a) z).
class RigidMotion {
 public:
  RigidMotion() = default;

  RigidMotion(cplx a, cplx phase) : a_(a), phase_(phase) {
    if (std::abs(std::abs(phase) - 1.0) > 1e-12) {
      throw InvalidArgumentError("RigidMotion: |phase| must be 1");
    }
  }

  static RigidMotion from_angle(cplx a, double theta) {
    return RigidMotion(a, std::polar(1.0, theta));
  }

  cplx center() const { return a_; }
  cplx phase() const { return phase_; }

  /// Mobius coefficients (alpha, beta, gamma, delta) of (alpha z + beta)/(gamma z + delta).
  struct Coefficients {
    cplx alpha, beta, gamma, delta;
  };

  Coefficients coefficients() const { return {phase_, -phase_ * a_, std::conj(a_), cplx(1.0)}; }

  SpherePoint apply(const SpherePoint& p) const {
    const auto [al, be, ga, de] = coefficients();
    if (p.is_infinity()) {
      // Limit of (al z + be)/(ga z + de) as z -> inf.
      return SpherePoint::from_ratio(al, ga);
    }
    const cplx z = p.value();
    return SpherePoint::from_ratio(al * z + be, ga * z + de);
  }

  /// Inverse rotation: T^{-1}(w) = conj(phase) * (w + a phase) / (1 - conj(a phase) w).
  RigidMotion inverse() const { return RigidMotion(-a_ * phase_, std::conj(phase_)); }

 private:
  cplx a_{0.0, 0.0};
  cplx phase_{1.0, 0.0};
};

inline SpherePoint apply_motion(const RigidMotion& t, const SpherePoint& p) { return t.apply(p); }

}  // namespace sphlab
