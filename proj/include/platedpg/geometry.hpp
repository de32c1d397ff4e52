#pragma once

#include <cmath>

namespace platedpg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  constexpr Vec2& operator+=(Vec2 b) {
    x += b.x;
    y += b.y;
    return *this;
  }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
// Rotation by -90 degrees: for a counterclockwise boundary tangent this is
// the outward normal.
constexpr Vec2 rotate_cw(Vec2 a) { return {a.y, -a.x}; }

// Symmetric 2x2 tensor [[xx, xy], [xy, yy]].
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static constexpr Sym2 identity() { return {1.0, 0.0, 1.0}; }

  friend constexpr Sym2 operator+(Sym2 a, Sym2 b) { return {a.xx + b.xx, a.xy + b.xy, a.yy + b.yy}; }
  friend constexpr Sym2 operator-(Sym2 a, Sym2 b) { return {a.xx - b.xx, a.xy - b.xy, a.yy - b.yy}; }
  friend constexpr Sym2 operator*(double s, Sym2 a) { return {s * a.xx, s * a.xy, s * a.yy}; }
  constexpr Sym2& operator+=(Sym2 b) {
    xx += b.xx;
    xy += b.xy;
    yy += b.yy;
    return *this;
  }
  constexpr Sym2 operator-() const { return {-xx, -xy, -yy}; }

  constexpr double trace() const { return xx + yy; }
  constexpr Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }
};

// Frobenius inner product A : B.
constexpr double contract(Sym2 a, Sym2 b) { return a.xx * b.xx + 2.0 * a.xy * b.xy + a.yy * b.yy; }
inline double frobenius_norm(Sym2 a) { return std::sqrt(contract(a, a)); }
// a . S b
constexpr double bilinear(Vec2 a, Sym2 s, Vec2 b) { return dot(a, s.apply(b)); }

}  // namespace platedpg
