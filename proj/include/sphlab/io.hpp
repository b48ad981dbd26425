#pragma once

// Text formats: a small ordered JSON writer (fixed field order, floats with 17
// significant digits so output is byte-reproducible), rational-function JSON,
// domain strings, index schedules and report serializers.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sphlab/bounds.hpp"
#include "sphlab/concentration.hpp"
#include "sphlab/covering.hpp"
#include "sphlab/domain.hpp"
#include "sphlab/errors.hpp"
#include "sphlab/funcmodel.hpp"
#include "sphlab/liouville.hpp"
#include "sphlab/quadrature.hpp"

namespace sphlab {

inline std::string format_double(double v) {
  if (std::isnan(v)) return "null";
  if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Streaming JSON writer. Keys appear in the order they are written.
class JsonWriter {
 public:
  JsonWriter& begin_object() { return open('{'); }
  JsonWriter& end_object() { return close('}'); }
  JsonWriter& begin_array() { return open('['); }
  JsonWriter& end_array() { return close(']'); }

  JsonWriter& key(std::string_view k) {
    separator();
    quote(k);
    out_ << ':';
    after_key_ = true;
    return *this;
  }

  JsonWriter& value(double v) { return raw(format_double(v)); }
  JsonWriter& value(int v) { return raw(std::to_string(v)); }
  JsonWriter& value(long v) { return raw(std::to_string(v)); }
  JsonWriter& value(std::size_t v) { return raw(std::to_string(v)); }
  JsonWriter& value(bool v) { return raw(v ? "true" : "false"); }
  JsonWriter& value(const char* s) { return value(std::string_view(s)); }
  JsonWriter& value(const std::string& s) { return value(std::string_view(s)); }
  JsonWriter& value(std::string_view s) {
    separator();
    quote(s);
    return *this;
  }
  /// Complex numbers as [re, im].
  JsonWriter& value(cplx z) { return begin_array().value(z.real()).value(z.imag()).end_array(); }
  JsonWriter& value(const SpherePoint& p) {
    if (p.is_infinity()) return value("inf");
    return value(p.value());
  }
  JsonWriter& null() { return raw("null"); }

  template <typename T>
  JsonWriter& field(std::string_view k, const T& v) {
    key(k);
    return value(v);
  }

  std::string str() const { return out_.str(); }

 private:
  JsonWriter& open(char c) {
    separator();
    out_ << c;
    first_ = true;
    return *this;
  }
  JsonWriter& close(char c) {
    out_ << c;
    first_ = false;
    return *this;
  }
  JsonWriter& raw(std::string_view s) {
    separator();
    out_ << s;
    return *this;
  }
  void separator() {
    if (after_key_) {
      after_key_ = false;
      return;
    }
    if (!first_) out_ << ',';
    first_ = false;
  }
  void quote(std::string_view s) {
    out_ << '"';
    for (char c : s) {
      switch (c) {
        case '"': out_ << "\\\""; break;
        case '\\': out_ << "\\\\"; break;
        case '\n': out_ << "\\n"; break;
        case '\t': out_ << "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\u%04x", c);
            out_ << buf;
          } else {
            out_ << c;
          }
      }
    }
    out_ << '"';
  }

  std::ostringstream out_;
  bool first_ = true;
  bool after_key_ = false;
};

// ---------------------------------------------------------------------------
// Parsing

namespace detail {

inline Polynomial parse_coefficients(const nlohmann::json& arr, const char* which) {
  if (!arr.is_array() || arr.empty()) {
    throw InvalidArgumentError(std::string("rational JSON: \"") + which + "\" must be a nonempty array");
  }
  std::vector<cplx> c;
  for (const auto& e : arr) {
    if (e.is_number()) {
      c.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      c.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw InvalidArgumentError(std::string("rational JSON: bad coefficient in \"") + which + "\"");
    }
  }
  return Polynomial(std::move(c));
}

inline std::vector<double> parse_numbers(std::string_view s, std::size_t expected_min, std::size_t expected_max,
                                         const std::string& what) {
  std::vector<double> out;
  std::string item;
  std::stringstream ss{std::string(s)};
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw InvalidArgumentError("bad number '" + item + "' in " + what);
    }
    if (pos != item.size()) throw InvalidArgumentError("bad number '" + item + "' in " + what);
    out.push_back(v);
  }
  if (out.size() < expected_min || out.size() > expected_max) {
    throw InvalidArgumentError("wrong number of values in " + what);
  }
  return out;
}

}  // namespace detail

/// {"num": [[re,im],...], "den": [[re,im],...]}, ascending powers. Plain
/// numbers are accepted as real coefficients; "den" defaults to [1].
inline RationalFunc parse_rational(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgumentError(std::string("rational JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("num")) throw InvalidArgumentError("rational JSON: expected an object with \"num\"");
  const Polynomial num = detail::parse_coefficients(j["num"], "num");
  const Polynomial den = j.contains("den") ? detail::parse_coefficients(j["den"], "den") : Polynomial{1.0};
  return RationalFunc(num, den);
}

inline std::string rational_to_json(const RationalFunc& f) {
  JsonWriter w;
  auto coeffs = [&](const Polynomial& p) {
    w.begin_array();
    for (const auto& c : p.coefficients()) w.value(c);
    if (p.coefficients().empty()) w.value(cplx(0.0, 0.0));
    w.end_array();
  };
  w.begin_object();
  w.key("num");
  coeffs(f.numerator());
  w.key("den");
  coeffs(f.denominator());
  w.end_object();
  return w.str();
}

/// Inverse of Domain2D::describe: "disk:cx,cy,r", "rect:x0,x1,y0,y1",
/// "annulus:cx,cy,rin,rout", "diskminus:cx,cy,r;px,py,hr;...".
inline Domain2D parse_domain(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidArgumentError("domain '" + spec + "': expected kind:values");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "disk") {
    const auto v = detail::parse_numbers(rest, 3, 3, "disk domain");
    return Domain2D::disk({v[0], v[1]}, v[2]);
  }
  if (kind == "rect") {
    const auto v = detail::parse_numbers(rest, 4, 4, "rect domain");
    return Domain2D::rectangle(v[0], v[1], v[2], v[3]);
  }
  if (kind == "annulus") {
    const auto v = detail::parse_numbers(rest, 4, 4, "annulus domain");
    return Domain2D::annulus({v[0], v[1]}, v[2], v[3]);
  }
  if (kind == "diskminus") {
    std::vector<std::string> parts;
    std::stringstream ss(rest);
    for (std::string p; std::getline(ss, p, ';');) parts.push_back(p);
    if (parts.empty()) throw InvalidArgumentError("diskminus domain: missing disk");
    const auto d = detail::parse_numbers(parts[0], 3, 3, "diskminus domain");
    std::vector<Hole> holes;
    for (std::size_t k = 1; k < parts.size(); ++k) {
      const auto h = detail::parse_numbers(parts[k], 3, 3, "diskminus hole");
      holes.push_back({{h[0], h[1]}, h[2]});
    }
    return Domain2D::disk_minus_points({d[0], d[1]}, d[2], std::move(holes));
  }
  throw InvalidArgumentError("unknown domain kind '" + kind + "'");
}

/// "a:b:geom" (doubling), "a:b" (consecutive) or "n1,n2,...".
inline std::vector<int> parse_indices(const std::string& spec) {
  auto to_int = [&](const std::string& s) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(s, &pos);
    } catch (const std::exception&) {
      throw InvalidArgumentError("bad index '" + s + "' in schedule '" + spec + "'");
    }
    if (pos != s.size()) throw InvalidArgumentError("bad index '" + s + "' in schedule '" + spec + "'");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = spec.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
  std::vector<int> out;
  if (sep == ':') {
    if (parts.size() == 3 && parts[2] == "geom") return geometric_schedule(to_int(parts[0]), to_int(parts[1]));
    if (parts.size() != 2) throw InvalidArgumentError("schedule '" + spec + "': expected a:b, a:b:geom or a list");
    const int a = to_int(parts[0]), b = to_int(parts[1]);
    if (a < 1 || b < a) throw InvalidArgumentError("schedule '" + spec + "': empty range");
    for (int n = a; n <= b; ++n) out.push_back(n);
    return out;
  }
  for (const auto& p : parts) out.push_back(to_int(p));
  return out;
}

// ---------------------------------------------------------------------------
// Report serializers

inline void write_json(JsonWriter& w, const QuadResult& r) {
  w.begin_object()
      .field("value", r.value)
      .field("error_estimate", r.error_estimate)
      .field("cells", r.cells)
      .field("converged", r.converged)
      .end_object();
}

inline void write_json(JsonWriter& w, const IrregularPoint& p) {
  w.begin_object().field("location", p.location).field("marty_growth_exponent", p.marty_growth_exponent);
  w.key("witness").begin_array();
  for (const auto& e : p.witness)
    w.begin_object().field("n", e.n).field("z", e.z).field("sph_deriv", e.sph_deriv).end_object();
  w.end_array().end_object();
}

inline const char* to_string(DetectionStatus s) { return s == DetectionStatus::Finite ? "finite" : "not_quasi_normal"; }

inline void write_json(JsonWriter& w, const MassProfile& p) {
  w.begin_object().field("status", to_string(p.status));
  if (p.status == DetectionStatus::NotQuasiNormal) {
    w.field("reason", p.detection.reason)
        .field("flagged_cells", p.detection.flagged_count())
        .field("clusters", p.detection.cluster_count)
        .field("widest_cluster", p.detection.widest_cluster);
  }
  w.key("S").begin_array();
  for (const auto& pt : p.S) write_json(w, pt);
  w.end_array();
  w.key("masses").begin_array();
  for (const auto& m : p.masses) {
    w.begin_object()
        .field("location", m.location)
        .field("alpha", m.alpha)
        .field("uncertainty", m.uncertainty)
        .field("quantized", m.quantized)
        .end_object();
  }
  w.end_array();
  w.field("residual_area", p.residual_area).field("order_bound", p.order_bound);
  w.field("resolution", p.detection.resolution).end_object();
}

inline void write_json(JsonWriter& w, const CoveringReport& r) {
  w.begin_object()
      .field("C", r.C)
      .field("m", r.m)
      .field("epsilon", r.epsilon)
      .field("area", r.area)
      .field("measure_low", r.measure_low)
      .field("grid_error", r.grid_error)
      .field("sampled_points", r.sampled_E.points.size());
  if (!r.sampled_E.points.empty() && r.measure_low > 0.0) {
    try {
      const auto t = three_separated_points(r.sampled_E, r.measure_low);
      w.key("separated_triple").begin_object();
      w.key("points").begin_array().value(t.a).value(t.b).value(t.c).end_array();
      w.field("achieved_delta", t.achieved_delta).field("target_delta", t.target_delta).end_object();
    } catch (const Error&) {
      w.key("separated_triple").null();
    }
  }
  w.end_object();
}

inline void write_json(JsonWriter& w, const BoundReport& r) {
  w.begin_object().field("bound_name", r.bound_name);
  w.key("parameters").begin_object();
  for (const auto& [k, v] : r.parameters) w.field(k, v);
  w.end_object();
  w.field("max_ratio", r.max_ratio).field("grid_points", r.grid_points).field("hypothesis_value", r.hypothesis_value);
  w.key("grid_violations").begin_array();
  for (const auto& v : r.grid_violations)
    w.begin_object().field("z", v.z).field("sph_deriv", v.sph_deriv).field("bound", v.bound).end_object();
  w.end_array().end_object();
}

/// PDESolution metadata (the grid itself goes to CSV).
inline void write_json(JsonWriter& w, const PDESolution& s) {
  const Grid2D& g = s.u.grid;
  w.begin_object()
      .field("residual_norm", s.residual_norm)
      .field("newton_iters", s.newton_iters)
      .field("converged", s.converged)
      .field("nx", g.nx())
      .field("ny", g.ny())
      .field("h", g.h())
      .field("max_abs_u", s.u.max_abs())
      .end_object();
}

template <typename T>
std::string to_json(const T& obj) {
  JsonWriter w;
  write_json(w, obj);
  return w.str();
}

}  // namespace sphlab
