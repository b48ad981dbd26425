#pragma once

// Dense complex polynomials with ascending coefficients, plus the two pieces
// of machinery the rest of the library leans on: an approximate GCD used to
// keep rational functions coprime, and a companion-matrix root finder.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "sphlab/errors.hpp"
#include "sphlab/sphere.hpp"

namespace sphlab {

class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(std::initializer_list<cplx> coeffs) : c_(coeffs) { trim(); }
  explicit Polynomial(std::vector<cplx> coeffs) : c_(std::move(coeffs)) { trim(); }

  static Polynomial constant(cplx v) { return Polynomial({v}); }
  static Polynomial monomial(cplx coeff, int degree) {
    std::vector<cplx> c(static_cast<std::size_t>(degree) + 1, cplx(0.0));
    c.back() = coeff;
    return Polynomial(std::move(c));
  }

  /// Degree of the zero polynomial is -1.
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  std::span<const cplx> coefficients() const { return c_; }
  cplx coefficient(int k) const { return k >= 0 && k <= degree() ? c_[static_cast<std::size_t>(k)] : cplx(0.0); }
  cplx leading() const { return c_.empty() ? cplx(0.0) : c_.back(); }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  cplx operator()(cplx z) const {
    cplx acc(0.0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * z + *it;
    return acc;
  }

  /// Value and first derivative by a single Horner sweep.
  std::pair<cplx, cplx> eval_with_derivative(cplx z) const {
    cplx p(0.0), dp(0.0);
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      dp = dp * z + p;
      p = p * z + *it;
    }
    return {p, dp};
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<cplx> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = static_cast<double>(k) * c_[k];
    return Polynomial(std::move(d));
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<cplx> r(std::max(a.c_.size(), b.c_.size()), cplx(0.0));
    for (std::size_t k = 0; k < a.c_.size(); ++k) r[k] += a.c_[k];
    for (std::size_t k = 0; k < b.c_.size(); ++k) r[k] += b.c_[k];
    return Polynomial(std::move(r));
  }

  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + b * cplx(-1.0); }

  friend Polynomial operator*(const Polynomial& a, cplx s) {
    std::vector<cplx> r(a.c_);
    for (auto& v : r) v *= s;
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(cplx s, const Polynomial& a) { return a * s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<cplx> r(a.c_.size() + b.c_.size() - 1, cplx(0.0));
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }

  /// Euclidean division: returns (quotient, remainder).
  friend std::pair<Polynomial, Polynomial> divmod(const Polynomial& a, const Polynomial& b) {
    if (b.is_zero()) throw InvalidArgumentError("Polynomial division by zero polynomial");
    if (a.degree() < b.degree()) return {Polynomial{}, a};
    std::vector<cplx> rem(a.c_);
    const int db = b.degree();
    std::vector<cplx> quot(static_cast<std::size_t>(a.degree() - db) + 1, cplx(0.0));
    for (int k = a.degree() - db; k >= 0; --k) {
      const cplx q = rem[static_cast<std::size_t>(k + db)] / b.leading();
      quot[static_cast<std::size_t>(k)] = q;
      for (int j = 0; j <= db; ++j) rem[static_cast<std::size_t>(k + j)] -= q * b.c_[static_cast<std::size_t>(j)];
      rem[static_cast<std::size_t>(k + db)] = cplx(0.0);
    }
    rem.resize(static_cast<std::size_t>(db));
    return {Polynomial(std::move(quot)), Polynomial(std::move(rem))};
  }

  /// Drops trailing coefficients below rel * max|c|.
  Polynomial trimmed(double rel) const {
    std::vector<cplx> r(c_);
    const double cut = rel * max_abs_coefficient();
    while (!r.empty() && std::abs(r.back()) <= cut) r.pop_back();
    return Polynomial(std::move(r));
  }

  /// Scaled so that the largest coefficient has modulus 1.
  Polynomial normalized() const {
    const double m = max_abs_coefficient();
    return m > 0.0 ? *this * cplx(1.0 / m) : *this;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) { return a.c_ == b.c_; }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == cplx(0.0)) c_.pop_back();
  }

  std::vector<cplx> c_;
};

/// Approximate GCD by the Euclidean algorithm on normalized polynomials; a
/// remainder whose coefficients all fall below `threshold` counts as zero.
/// Returns a constant polynomial when the inputs are (numerically) coprime.
inline Polynomial approximate_gcd(const Polynomial& a, const Polynomial& b, double threshold = 1e-10) {
  if (a.is_zero()) return b.normalized();
  if (b.is_zero()) return a.normalized();
  Polynomial u = a.normalized();
  Polynomial v = b.normalized();
  if (u.degree() < v.degree()) std::swap(u, v);
  while (v.degree() > 0) {
    Polynomial r = divmod(u, v).second;
    if (r.max_abs_coefficient() <= threshold) return v;
    u = std::move(v);
    v = r.trimmed(threshold).normalized();
    if (v.is_zero()) return u;
  }
  return Polynomial::constant(1.0);
}

namespace detail {

// Parlett-Reinsch balancing with radix 2, applied in place.
inline void balance(Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  bool done = false;
  while (!done) {
    done = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      double col = 0.0, row = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        col += std::abs(m(j, i));
        row += std::abs(m(i, j));
      }
      if (col == 0.0 || row == 0.0) continue;
      double g = row / 2.0;
      double f = 1.0;
      const double s = col + row;
      while (col < g) {
        f *= 2.0;
        col *= 4.0;
      }
      g = row * 2.0;
      while (col > g) {
        f /= 2.0;
        col /= 4.0;
      }
      if ((col + row) / f < 0.95 * s) {
        done = false;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
}

}  // namespace detail

/// Roots of p by eigenvalues of the balanced companion matrix, each polished
/// with two guarded Newton steps. Leading coefficients below 1e-14 of the
/// largest are dropped first (those roots sit near infinity).
inline std::vector<cplx> polynomial_roots(const Polynomial& p) {
  const Polynomial q = p.trimmed(1e-14);
  const int d = q.degree();
  if (d < 0) throw DegenerateTargetError("polynomial_roots: zero polynomial");
  if (d == 0) return {};
  if (d == 1) return {-q.coefficient(0) / q.coefficient(1)};

  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(d, d);
  const cplx lead = q.leading();
  for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < d; ++i) comp(i, d - 1) = -q.coefficient(i) / lead;
  detail::balance(comp);
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(comp, false);
  if (solver.info() != Eigen::Success) throw Error("polynomial_roots: eigenvalue solve failed");

  std::vector<cplx> roots(solver.eigenvalues().data(), solver.eigenvalues().data() + d);
  const Polynomial dq = q.derivative();
  for (auto& z : roots) {
    for (int step = 0; step < 2; ++step) {
      const cplx fz = q(z);
      const cplx dz = dq(z);
      if (dz == cplx(0.0)) break;
      const cplx cand = z - fz / dz;
      if (std::abs(q(cand)) < std::abs(fz)) z = cand;
    }
  }
  return roots;
}

}  // namespace sphlab
