#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "sphlab.hpp"

namespace testutil {

using sphlab::cplx;

inline cplx random_cplx(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  return {g(rng), g(rng)};
}

inline cplx random_in_disk(std::mt19937_64& rng, double r) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return std::polar(r * std::sqrt(u(rng)), 2.0 * std::numbers::pi * u(rng));
}

inline sphlab::RigidMotion random_motion(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  return sphlab::RigidMotion::from_angle(random_cplx(rng), u(rng));
}

/// Random sphere point, occasionally infinity.
inline sphlab::SpherePoint random_sphere_point(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, 19);
  if (pick(rng) == 0) return sphlab::SpherePoint::infinity();
  std::exponential_distribution<double> mag(0.5);
  const double r = pick(rng) < 10 ? mag(rng) : 1.0 / (mag(rng) + 1e-3);
  std::uniform_real_distribution<double> a(0.0, 2.0 * std::numbers::pi);
  return sphlab::SpherePoint::finite(std::polar(r, a(rng)));
}

/// Random rational function of exact degree d = max(deg p, deg q) with
/// coefficients of modulus O(1); generic, hence coprime.
inline sphlab::RationalFunc random_rational(std::mt19937_64& rng, int d) {
  std::uniform_int_distribution<int> which(0, 2);
  std::uniform_int_distribution<int> low(0, d);
  const int shape = which(rng);
  const int dp = shape == 1 ? low(rng) : d;
  const int dq = shape == 0 ? low(rng) : d;
  auto poly = [&](int deg) {
    std::vector<cplx> c;
    for (int k = 0; k <= deg; ++k) c.push_back(random_cplx(rng));
    c.back() += c.back() / std::abs(c.back());  // keep the leading coefficient away from 0
    return sphlab::Polynomial(std::move(c));
  };
  return sphlab::RationalFunc(poly(dp), poly(dq));
}

inline sphlab::MeroFunc linear(double a) { return sphlab::RationalFunc::polynomial(sphlab::Polynomial{0.0, a}); }

}  // namespace testutil
