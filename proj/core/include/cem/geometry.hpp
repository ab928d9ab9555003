#pragma once

#include <array>
#include <cmath>

namespace cem {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }

  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }

  Vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  // +90 degree rotation
  Vec2 perp() const { return {-y, x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Symmetric 2D stress/strain in Voigt order (11, 22, 12).
using Voigt = std::array<double, 3>;

inline double triangle_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b - a).cross(c - a));
}

}  // namespace cem
