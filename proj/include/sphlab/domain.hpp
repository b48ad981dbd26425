#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

#include "sphlab/errors.hpp"
#include "sphlab/sphere.hpp"

namespace sphlab {

struct Rectangle {
  double x0, x1, y0, y1;
};

struct Disk {
  cplx center;
  double radius;
};

struct Annulus {
  cplx center;
  double r_in, r_out;
};

struct Hole {
  cplx point;
  double radius;
};

struct DiskMinusPoints {
  cplx center;
  double radius;
  std::vector<Hole> holes;
};

struct BoundingBox {
  double x0, x1, y0, y1;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
};

/// Planar region used for integration and search.
class Domain2D {
 public:
  using Shape = std::variant<Rectangle, Disk, Annulus, DiskMinusPoints>;

  Domain2D(Shape shape) : shape_(std::move(shape)) { validate(); }  // NOLINT(google-explicit-constructor)

  static Domain2D rectangle(double x0, double x1, double y0, double y1) { return Domain2D(Rectangle{x0, x1, y0, y1}); }
  static Domain2D disk(cplx c, double r) { return Domain2D(Disk{c, r}); }
  static Domain2D unit_disk() { return disk(0.0, 1.0); }
  static Domain2D annulus(cplx c, double r_in, double r_out) { return Domain2D(Annulus{c, r_in, r_out}); }
  static Domain2D disk_minus_points(cplx c, double r, std::vector<Hole> holes) {
    return Domain2D(DiskMinusPoints{c, r, std::move(holes)});
  }

  const Shape& shape() const { return shape_; }

  bool contains(cplx z) const {
    return std::visit(
        [&](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Rectangle>) {
            return z.real() >= s.x0 && z.real() <= s.x1 && z.imag() >= s.y0 && z.imag() <= s.y1;
          } else if constexpr (std::is_same_v<T, Disk>) {
            return std::abs(z - s.center) <= s.radius;
          } else if constexpr (std::is_same_v<T, Annulus>) {
            const double r = std::abs(z - s.center);
            return r >= s.r_in && r <= s.r_out;
          } else {
            if (std::abs(z - s.center) > s.radius) return false;
            return std::none_of(s.holes.begin(), s.holes.end(),
                                [&](const Hole& h) { return std::abs(z - h.point) < h.radius; });
          }
        },
        shape_);
  }

  /// Unsigned distance from z to the boundary curve(s).
  double distance_to_boundary(cplx z) const {
    return std::visit(
        [&](const auto& s) -> double {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Rectangle>) {
            const double x = z.real(), y = z.imag();
            if (contains(z)) return std::min({x - s.x0, s.x1 - x, y - s.y0, s.y1 - y});
            const double dx = std::max({s.x0 - x, 0.0, x - s.x1});
            const double dy = std::max({s.y0 - y, 0.0, y - s.y1});
            return std::hypot(dx, dy);
          } else if constexpr (std::is_same_v<T, Disk>) {
            return std::abs(std::abs(z - s.center) - s.radius);
          } else if constexpr (std::is_same_v<T, Annulus>) {
            const double r = std::abs(z - s.center);
            return std::min(std::abs(r - s.r_in), std::abs(r - s.r_out));
          } else {
            double d = std::abs(std::abs(z - s.center) - s.radius);
            for (const auto& h : s.holes) d = std::min(d, std::abs(std::abs(z - h.point) - h.radius));
            return d;
          }
        },
        shape_);
  }

  BoundingBox bounding_box() const {
    return std::visit(
        [](const auto& s) -> BoundingBox {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Rectangle>) {
            return {s.x0, s.x1, s.y0, s.y1};
          } else if constexpr (std::is_same_v<T, Annulus>) {
            return {s.center.real() - s.r_out, s.center.real() + s.r_out, s.center.imag() - s.r_out,
                    s.center.imag() + s.r_out};
          } else {
            return {s.center.real() - s.radius, s.center.real() + s.radius, s.center.imag() - s.radius,
                    s.center.imag() + s.radius};
          }
        },
        shape_);
  }

  double diameter() const {
    const auto b = bounding_box();
    if (std::holds_alternative<Rectangle>(shape_)) return std::hypot(b.width(), b.height());
    return b.width();
  }

  std::string describe() const;

 private:
  void validate() const {
    std::visit(
        [](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Rectangle>) {
            if (!(s.x1 > s.x0 && s.y1 > s.y0)) throw InvalidArgumentError("Rectangle: empty");
          } else if constexpr (std::is_same_v<T, Disk>) {
            if (!(s.radius > 0.0)) throw InvalidArgumentError("Disk: radius must be positive");
          } else if constexpr (std::is_same_v<T, Annulus>) {
            if (!(s.r_in >= 0.0 && s.r_in < s.r_out)) throw InvalidArgumentError("Annulus: need 0 <= r_in < r_out");
          } else {
            if (!(s.radius > 0.0)) throw InvalidArgumentError("DiskMinusPoints: radius must be positive");
            for (const auto& h : s.holes) {
              if (!(h.radius > 0.0)) throw InvalidArgumentError("DiskMinusPoints: hole radius must be positive");
              if (std::abs(h.point - s.center) + h.radius > s.radius) {
                throw InvalidArgumentError("DiskMinusPoints: hole not inside the disk");
              }
            }
            for (std::size_t i = 0; i < s.holes.size(); ++i)
              for (std::size_t j = i + 1; j < s.holes.size(); ++j)
                if (std::abs(s.holes[i].point - s.holes[j].point) < s.holes[i].radius + s.holes[j].radius)
                  throw InvalidArgumentError("DiskMinusPoints: holes overlap");
          }
        },
        shape_);
  }

  Shape shape_;
};

inline std::string Domain2D::describe() const {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  return std::visit(
      [&](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Rectangle>) {
          return "rect:" + num(s.x0) + "," + num(s.x1) + "," + num(s.y0) + "," + num(s.y1);
        } else if constexpr (std::is_same_v<T, Disk>) {
          return "disk:" + num(s.center.real()) + "," + num(s.center.imag()) + "," + num(s.radius);
        } else if constexpr (std::is_same_v<T, Annulus>) {
          return "annulus:" + num(s.center.real()) + "," + num(s.center.imag()) + "," + num(s.r_in) + "," +
                 num(s.r_out);
        } else {
          std::string out =
              "diskminus:" + num(s.center.real()) + "," + num(s.center.imag()) + "," + num(s.radius);
          for (const auto& h : s.holes)
            out += ";" + num(h.point.real()) + "," + num(h.point.imag()) + "," + num(h.radius);
          return out;
        }
      },
      shape_);
}

}  // namespace sphlab
