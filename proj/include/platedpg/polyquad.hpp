#pragma once

// Quadrature rules and polynomial bases on triangles.
//
// Bases are scaled monomials in the frame of a triangle: with centroid c and
// diameter h, basis function k of degree p is ((x-cx)/h)^i ((y-cy)/h)^j where
// (i, j) runs over i + j <= p in graded lexicographic order
//   (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), (3,0), ...

#include <array>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "platedpg/geometry.hpp"

namespace platedpg {

using Tri = std::array<Vec2, 3>;

double signed_area(const Tri& t);
double diameter(const Tri& t);
Vec2 centroid(const Tri& t);

// Rule on the reference triangle (0,0), (1,0), (0,1). Points are barycentric
// (l0, l1, l2) with x = l0 v0 + l1 v1 + l2 v2; weights sum to 1/2.
struct QuadRuleTri {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;
};

// Gauss-Legendre rule on [0, 1], exact to degree 2n-1.
struct QuadRuleEdge {
  std::vector<double> points;
  std::vector<double> weights;
  int degree = 0;
};

// Conical-product Gauss rule with exactness >= min_degree, 1 <= min_degree <= 12.
const QuadRuleTri& tri_rule(int min_degree);
// 1 <= n <= 10.
const QuadRuleEdge& edge_rule(int n);

inline constexpr int kAssemblyDegree = 8;
inline constexpr int kErrorDegree = 12;
inline constexpr int kEdgePoints = 5;

struct QuadPoint {
  Vec2 x;
  double w;
};

// Physical points and weights (weights sum to |T|).
std::vector<QuadPoint> map_rule(const QuadRuleTri& rule, const Tri& t);
// Points on the segment a -> b; weights sum to |b - a|. s is the arclength
// parameter in [0, |b - a|].
struct EdgePoint {
  Vec2 x;
  double s;
  double w;
};
std::vector<EdgePoint> map_rule(const QuadRuleEdge& rule, Vec2 a, Vec2 b);

struct Frame {
  Vec2 center;
  double h = 1.0;
};
Frame frame_of(const Tri& t);

// Exponent pairs of the scaled monomials up to degree p.
std::vector<std::pair<int, int>> monomial_exponents(int p);

struct ScalarEval {
  double value = 0.0;
  Vec2 grad;
  Sym2 hess;
};

class ScalarBasis {
public:
  ScalarBasis(int degree, Frame frame);
  ScalarBasis(int degree, const Tri& t) : ScalarBasis(degree, frame_of(t)) {}

  int degree() const noexcept { return degree_; }
  std::size_t size() const noexcept { return exps_.size(); }
  const Frame& frame() const noexcept { return frame_; }

  // out.size() must equal size().
  void eval(Vec2 x, std::span<ScalarEval> out) const;
  std::vector<ScalarEval> eval(Vec2 x) const;
  // Row-major table [point][function].
  std::vector<ScalarEval> eval(std::span<const Vec2> xs) const;

  // Evaluates sum_k c[k] phi_k.
  ScalarEval combine(Vec2 x, std::span<const double> c) const;

private:
  int degree_;
  Frame frame_;
  std::vector<std::pair<int, int>> exps_;
};

struct TensorEval {
  Sym2 value;
  Vec2 div;  // row-wise divergence
  double divdiv = 0.0;
};

// Traces of a symmetric tensor field on an edge with unit tangent t and unit
// normal n.
struct TensorEdgeTrace {
  Vec2 theta_n;
  double t_theta_n = 0.0;
  double n_theta_n = 0.0;
  double n_div = 0.0;
};

TensorEdgeTrace edge_trace(const TensorEval& e, Vec2 t, Vec2 n);

// Slot order inside each scalar function: E11, E12 = [[0,1],[1,0]], E22.
// Index of (scalar function k, slot s) is 3k + s.
class TensorBasis {
public:
  TensorBasis(int degree, Frame frame);
  TensorBasis(int degree, const Tri& t) : TensorBasis(degree, frame_of(t)) {}

  int degree() const noexcept { return scalar_.degree(); }
  std::size_t size() const noexcept { return 3 * scalar_.size(); }
  const ScalarBasis& scalar() const noexcept { return scalar_; }

  void eval(Vec2 x, std::span<TensorEval> out) const;
  std::vector<TensorEval> eval(Vec2 x) const;
  std::vector<TensorEval> eval(std::span<const Vec2> xs) const;

  // Builds the tensor entries from already evaluated scalar functions.
  static void from_scalar(std::span<const ScalarEval> s, std::span<TensorEval> out);

private:
  ScalarBasis scalar_;
};

// E11, E12, E22 as tensors.
inline constexpr std::array<Sym2, 3> kSymUnits{Sym2{1.0, 0.0, 0.0}, Sym2{0.0, 1.0, 0.0}, Sym2{0.0, 0.0, 1.0}};

}  // namespace platedpg
