#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace pinlab {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator-() const { return {-x, -y}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double norm2() const { return x * x + y * y; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

struct Vec2i {
  int x = 0;
  int y = 0;
  bool operator==(const Vec2i&) const = default;
  Vec2 to_vec2() const { return {double(x), double(y)}; }
  int inf_norm() const { return std::max(std::abs(x), std::abs(y)); }
};

// A unit direction on S^1, optionally carrying the irreducible lattice
// vector it is parallel to.  perp follows the convention xi_perp = (xi2, -xi1).
struct Direction {
  Vec2 unit;
  Vec2 perp;
  std::optional<Vec2i> rational;

  static Direction from_angle(double theta) {
    Direction d;
    d.unit = {std::cos(theta), std::sin(theta)};
    d.perp = {d.unit.y, -d.unit.x};
    return d;
  }

  static Direction from_lattice(Vec2i xi) {
    if (xi.x == 0 && xi.y == 0) throw std::invalid_argument("Direction: zero lattice vector");
    int g = std::gcd(std::abs(xi.x), std::abs(xi.y));
    xi = {xi.x / g, xi.y / g};
    Direction d;
    double n = xi.to_vec2().norm();
    d.unit = xi.to_vec2() * (1.0 / n);
    d.perp = {d.unit.y, -d.unit.x};
    d.rational = xi;
    return d;
  }

  double angle() const {
    double a = std::atan2(unit.y, unit.x);
    if (a < 0) a += 2.0 * M_PI;
    return a;
  }

  // |xi| for rational directions; throws otherwise.
  double lattice_norm() const {
    if (!rational) throw std::logic_error("Direction: lattice_norm needs a rational direction");
    return rational->to_vec2().norm();
  }
};

}  // namespace pinlab
