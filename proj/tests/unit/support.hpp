#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "platedpg/geometry.hpp"
#include "platedpg/linalg.hpp"
#include "platedpg/polyquad.hpp"

namespace testsupport {

using platedpg::DenseMatrix;
using platedpg::Tri;
using platedpg::Vec2;

inline constexpr Tri kReference{Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}};

inline double min_angle(const Tri& t) {
  double m = 10.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2 a = t[static_cast<std::size_t>((i + 1) % 3)] - t[static_cast<std::size_t>(i)];
    const Vec2 b = t[static_cast<std::size_t>((i + 2) % 3)] - t[static_cast<std::size_t>(i)];
    m = std::min(m, std::acos(platedpg::dot(a, b) / (platedpg::norm(a) * platedpg::norm(b))));
  }
  return m;
}

// Counterclockwise triangle with all angles >= 20 degrees, diameter in
// [1e-3, 10] and centroid within [-5, 5]^2.
inline Tri random_triangle(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> logscale(-3.0, 1.0);
  for (;;) {
    Tri t{Vec2{u(rng), u(rng)}, Vec2{u(rng), u(rng)}, Vec2{u(rng), u(rng)}};
    if (min_angle(t) < 20.0 * std::numbers::pi / 180.0) continue;
    if (platedpg::signed_area(t) < 0) std::swap(t[1], t[2]);
    const double s = std::pow(10.0, logscale(rng)) / platedpg::diameter(t);
    const Vec2 shift{5.0 * u(rng), 5.0 * u(rng)};
    for (auto& p : t) p = shift + s * p;
    return t;
  }
}

inline DenseMatrix random_spd(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  DenseMatrix x(n, n), a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) x(i, j) = g(rng);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = i == j ? static_cast<double>(n) : 0.0;
      for (std::size_t k = 0; k < n; ++k) s += x(i, k) * x(j, k);
      a(i, j) = s;
    }
  return a;
}

// Plain Gauss-Jordan inverse with partial pivoting (independent of the
// library's Cholesky).
inline DenseMatrix inverse(DenseMatrix a) {
  const std::size_t n = a.rows();
  DenseMatrix inv = DenseMatrix::identity(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(p, c))) p = r;
    for (std::size_t j = 0; j < n; ++j) {
      std::swap(a(c, j), a(p, j));
      std::swap(inv(c, j), inv(p, j));
    }
    const double d = a(c, c);
    for (std::size_t j = 0; j < n; ++j) {
      a(c, j) /= d;
      inv(c, j) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) m = std::max(m, std::abs(a(i, j) - b(i, j)));
  return m;
}

}  // namespace testsupport
