#pragma once

// Meromorphic functions and indexed families. Every evaluation goes through
// jet_at, which returns the value on the sphere together with the spherical
// derivative f# = |f'| / (1 + |f|^2) and never overflows near poles.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sphlab/domain.hpp"
#include "sphlab/errors.hpp"
#include "sphlab/polynomial.hpp"
#include "sphlab/sphere.hpp"

namespace sphlab {

struct Jet {
  SpherePoint value;
  double sph_deriv = 0.0;
};

/// Coprime quotient p/q of complex polynomials.
class RationalFunc {
 public:
  RationalFunc() : RationalFunc(Polynomial{}, Polynomial::constant(1.0)) {}

  /// Divides out the approximate GCD of num and den (threshold on normalized
  /// coefficients).
  RationalFunc(Polynomial num, Polynomial den, double gcd_threshold = 1e-10) {
    if (den.is_zero()) throw InvalidArgumentError("RationalFunc: denominator is identically zero");
    if (num.is_zero()) {
      num_ = Polynomial{};
      den_ = Polynomial::constant(1.0);
      return;
    }
    const Polynomial g = approximate_gcd(num, den, gcd_threshold);
    if (g.degree() > 0) {
      num = divmod(num, g).first;
      den = divmod(den, g).first;
    }
    // Scale so the denominator's largest coefficient is 1.
    const cplx s = 1.0 / den.max_abs_coefficient();
    num_ = num * s;
    den_ = den * s;
  }

  static RationalFunc polynomial(Polynomial p) { return RationalFunc(std::move(p), Polynomial::constant(1.0)); }

  const Polynomial& numerator() const { return num_; }
  const Polynomial& denominator() const { return den_; }
  int degree() const { return std::max(num_.degree(), den_.degree()) < 0 ? 0 : std::max(num_.degree(), den_.degree()); }
  bool is_constant() const { return num_.degree() <= 0 && den_.degree() <= 0; }

  Jet jet(cplx z) const {
    const auto [p, dp] = num_.eval_with_derivative(z);
    const auto [q, dq] = den_.eval_with_derivative(z);
    if (std::abs(p) + std::abs(q) < 1e-300) {
      throw DegenerateFunctionError("RationalFunc: numerator and denominator vanish together");
    }
    if (std::abs(p) <= std::abs(q)) {
      const cplx f = p / q;
      const cplx df = (dp * q - p * dq) / (q * q);
      return {SpherePoint::finite(f), std::abs(df) / (1.0 + std::norm(f))};
    }
    // |f| > 1: evaluate g = 1/f = q/p, which has the same spherical derivative.
    const cplx g = q / p;
    const cplx dg = (dq * p - q * dp) / (p * p);
    return {SpherePoint::from_ratio(p, q), std::abs(dg) / (1.0 + std::norm(g))};
  }

  RationalFunc reciprocal() const { return RationalFunc(den_, num_); }

  /// Numerator of f' over q^2 (the Wronskian p'q - pq').
  Polynomial wronskian() const { return num_.derivative() * den_ - num_ * den_.derivative(); }

 private:
  Polynomial num_;
  Polynomial den_;
};

/// T o f for a sphere rotation T, computed on coefficients.
inline RationalFunc compose(const RigidMotion& t, const RationalFunc& f) {
  const auto [al, be, ga, de] = t.coefficients();
  const auto& p = f.numerator();
  const auto& q = f.denominator();
  return RationalFunc(al * p + be * q, ga * p + de * q);
}

/// Result of a user formula: the value, and f' (or (1/f)' when the value is
/// infinity).
struct FormulaValue {
  SpherePoint value;
  cplx derivative;
};

/// Function given by closed-form f and f'. The supplied derivative is trusted;
/// see validate_formula for a consistency check.
class FormulaFunc {
 public:
  using Eval = std::function<FormulaValue(cplx)>;

  FormulaFunc(Eval eval, std::vector<cplx> excluded = {}, std::string label = {})
      : eval_(std::move(eval)), excluded_(std::move(excluded)), label_(std::move(label)) {}

  /// Convenience for entire / finite-valued formulas.
  static FormulaFunc from_pair(std::function<cplx(cplx)> f, std::function<cplx(cplx)> df,
                               std::vector<cplx> excluded = {}, std::string label = {}) {
    return FormulaFunc(
        [f = std::move(f), df = std::move(df)](cplx z) {
          const cplx v = f(z);
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            throw EvaluationDomainError("FormulaFunc: non-finite value");
          }
          return FormulaValue{SpherePoint::finite(v), df(z)};
        },
        std::move(excluded), std::move(label));
  }

  const std::vector<cplx>& excluded() const { return excluded_; }
  const std::string& label() const { return label_; }

  FormulaValue evaluate(cplx z) const {
    for (const auto& s : excluded_) {
      if (std::abs(z - s) <= 1e-14 * (1.0 + std::abs(s))) {
        throw EvaluationDomainError("FormulaFunc: evaluation at an excluded point");
      }
    }
    return eval_(z);
  }

  Jet jet(cplx z) const {
    const FormulaValue fv = evaluate(z);
    if (fv.value.is_infinity()) return {fv.value, std::abs(fv.derivative)};
    const cplx f = fv.value.value();
    const double af = std::abs(f);
    const double adf = std::abs(fv.derivative);
    if (af <= 1.0) return {fv.value, adf / (1.0 + af * af)};
    // |f| > 1: f# = |g'| / (1 + |g|^2) with g = 1/f, written without |f|^2.
    return {fv.value, (adf / af) / (af + 1.0 / af)};
  }

 private:
  Eval eval_;
  std::vector<cplx> excluded_;
  std::string label_;
};

/// Evaluable meromorphic function: rational or formula-backed.
class MeroFunc {
 public:
  MeroFunc(RationalFunc f) : impl_(std::move(f)) {}  // NOLINT(google-explicit-constructor)
  MeroFunc(FormulaFunc f) : impl_(std::move(f)) {}   // NOLINT(google-explicit-constructor)

  Jet jet(cplx z) const {
    return std::visit([&](const auto& f) { return f.jet(z); }, impl_);
  }
  double sph_deriv(cplx z) const { return jet(z).sph_deriv; }
  SpherePoint value(cplx z) const { return jet(z).value; }

  const RationalFunc* as_rational() const { return std::get_if<RationalFunc>(&impl_); }
  const FormulaFunc* as_formula() const { return std::get_if<FormulaFunc>(&impl_); }

 private:
  std::variant<RationalFunc, FormulaFunc> impl_;
};

inline Jet jet_at(const MeroFunc& f, cplx z) { return f.jet(z); }

/// Mismatch between a formula's supplied derivative and central differences.
struct FormulaMismatch {
  cplx z;
  cplx supplied;
  cplx numeric;
};

/// Cross-checks f' against central differences on a res x res probe grid over
/// `box`. Points within 1e-3 of an excluded point, or where the value is
/// infinite, are skipped.
inline std::vector<FormulaMismatch> validate_formula(const FormulaFunc& f, const BoundingBox& box, int res = 16,
                                                     double tol = 1e-5) {
  std::vector<FormulaMismatch> out;
  const double h = 1e-6 * std::max(box.width(), box.height());
  for (int j = 0; j < res; ++j) {
    for (int i = 0; i < res; ++i) {
      const cplx z(box.x0 + (i + 0.5) * box.width() / res, box.y0 + (j + 0.5) * box.height() / res);
      bool near_excluded = false;
      for (const auto& s : f.excluded()) near_excluded = near_excluded || std::abs(z - s) < 1e-3;
      if (near_excluded) continue;
      const FormulaValue c = f.evaluate(z);
      const FormulaValue xp = f.evaluate(z + h);
      const FormulaValue xm = f.evaluate(z - h);
      if (c.value.is_infinity() || xp.value.is_infinity() || xm.value.is_infinity()) continue;
      const cplx numeric = (xp.value.value() - xm.value.value()) / (2.0 * h);
      if (std::abs(numeric - c.derivative) > tol * (1.0 + std::abs(c.derivative))) {
        out.push_back({z, c.derivative, numeric});
      }
    }
  }
  return out;
}

/// Indexed family n -> f_n.
struct FamilySpec {
  std::function<MeroFunc(int)> member;
  std::vector<int> indices;
  bool locally_univalent = false;
  std::string label;
  /// Declared uniform bound C on (1/pi) * spherical area over the reference
  /// domain, when one is known.
  std::optional<double> area_bound;

  FamilySpec(std::function<MeroFunc(int)> m, std::vector<int> idx, bool univalent, std::string lbl,
             std::optional<double> bound = std::nullopt)
      : member(std::move(m)), indices(std::move(idx)), locally_univalent(univalent), label(std::move(lbl)),
        area_bound(bound) {
    if (indices.empty()) throw InvalidArgumentError("FamilySpec: empty index schedule");
    for (std::size_t k = 1; k < indices.size(); ++k) {
      if (indices[k] <= indices[k - 1]) throw InvalidArgumentError("FamilySpec: indices must be strictly increasing");
    }
  }

  MeroFunc at(int n) const { return member(n); }
  int last_index() const { return indices.back(); }
};

struct FamilyParams {
  std::vector<int> indices{1, 2, 4, 8, 16, 32, 64, 128};
  int m = 1;                  // degree of P for "nP"
  cplx value{0.0, 0.0};       // value for "constant"
  bool locally_univalent = false;  // flag for "constant"
};

/// 1, 2, 4, ... up to and including `last` (when last is a power-of-two multiple of first).
inline std::vector<int> geometric_schedule(int first, int last, int ratio = 2) {
  if (first < 1 || last < first || ratio < 2) throw InvalidArgumentError("geometric_schedule: bad range");
  std::vector<int> out;
  for (long long n = first; n <= last; n *= ratio) out.push_back(static_cast<int>(n));
  return out;
}

/// Built-in families: "nz", "exp_inz", "nP" (n * (2 z^m - 1)), "constant".
inline FamilySpec builtin_family(const std::string& name, const FamilyParams& params = {}) {
  if (name == "nz") {
    return FamilySpec(
        [](int n) { return MeroFunc(RationalFunc::polynomial(Polynomial{0.0, static_cast<double>(n)})); },
        params.indices, true, "nz", 1.0);
  }
  if (name == "exp_inz") {
    return FamilySpec(
        [](int n) {
          const cplx in(0.0, static_cast<double>(n));
          return MeroFunc(FormulaFunc::from_pair([in](cplx z) { return std::exp(in * z); },
                                                 [in](cplx z) { return in * std::exp(in * z); }, {},
                                                 "exp(i" + std::to_string(n) + "z)"));
        },
        params.indices, true, "exp_inz", std::nullopt);
  }
  if (name == "nP") {
    const int m = params.m;
    if (m < 1) throw InvalidArgumentError("builtin_family nP: m must be >= 1");
    return FamilySpec(
        [m](int n) {
          const double s = static_cast<double>(n);
          return MeroFunc(RationalFunc::polynomial(Polynomial::monomial(2.0 * s, m) + Polynomial::constant(-s)));
        },
        params.indices, m == 1, "nP", static_cast<double>(m));
  }
  if (name == "constant") {
    const cplx v = params.value;
    return FamilySpec([v](int) { return MeroFunc(RationalFunc::polynomial(Polynomial::constant(v))); },
                      params.indices, params.locally_univalent, "constant", 0.0);
  }
  throw UnknownFamilyError("unknown family: " + name);
}

/// Outcome of probing a family for local univalence.
struct UnivalenceCheck {
  bool ok = true;
  int index = 0;  // first failing member
  cplx where{0.0, 0.0};
  std::string reason;
};

/// Checks that scheduled members have f' != 0 on D (and, for rational
/// members, no multiple poles). Rational members are checked exactly via the
/// zeros of the Wronskian; formula members on a res x res probe grid.
inline UnivalenceCheck check_local_univalence(const FamilySpec& fam, const Domain2D& dom, int res = 32) {
  for (int n : fam.indices) {
    const MeroFunc f = fam.at(n);
    if (const auto* r = f.as_rational()) {
      const Polynomial w = r->wronskian();
      if (w.trimmed(1e-14).is_zero()) return {false, n, 0.0, "member is constant"};
      // Zeros of p'q - pq' are the critical points and the multiple poles.
      for (const auto& z : polynomial_roots(w)) {
        if (dom.contains(z)) return {false, n, z, "critical point or multiple pole"};
      }
    } else {
      const auto box = dom.bounding_box();
      for (int j = 0; j < res; ++j)
        for (int i = 0; i < res; ++i) {
          const cplx z(box.x0 + (i + 0.5) * box.width() / res, box.y0 + (j + 0.5) * box.height() / res);
          if (!dom.contains(z)) continue;
          if (f.sph_deriv(z) == 0.0) return {false, n, z, "vanishing derivative"};
        }
    }
  }
  return {};
}

}  // namespace sphlab
