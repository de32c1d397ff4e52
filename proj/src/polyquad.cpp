#include "platedpg/polyquad.hpp"

#include <algorithm>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <mutex>
#include <string>

#include "platedpg/errors.hpp"

namespace platedpg {

double signed_area(const Tri& t) { return 0.5 * cross(t[1] - t[0], t[2] - t[0]); }

double diameter(const Tri& t) {
  return std::max({norm(t[1] - t[0]), norm(t[2] - t[1]), norm(t[0] - t[2])});
}

Vec2 centroid(const Tri& t) { return (1.0 / 3.0) * (t[0] + t[1] + t[2]); }

namespace {

QuadRuleEdge make_gauss(int n) {
  // legendre_p_zeros returns the nonnegative roots in ascending order.
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
  std::vector<std::pair<double, double>> nodes;
  for (double x : zeros) {
    const double dp = boost::math::legendre_p_prime(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes.emplace_back(x, w);
    if (x != 0.0) nodes.emplace_back(-x, w);
  }
  std::sort(nodes.begin(), nodes.end());
  QuadRuleEdge r;
  r.degree = 2 * n - 1;
  for (auto [x, w] : nodes) {
    r.points.push_back(0.5 * (x + 1.0));
    r.weights.push_back(0.5 * w);
  }
  return r;
}

// Collapsed (Duffy) product: x = a, y = b (1 - a), Jacobian (1 - a). A
// polynomial of total degree d becomes degree d + 1 in a and d in b.
QuadRuleTri make_conical(int n) {
  const QuadRuleEdge g = make_gauss(n);
  QuadRuleTri r;
  r.degree = 2 * n - 2;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double a = g.points[static_cast<std::size_t>(i)];
      const double b = g.points[static_cast<std::size_t>(j)];
      const double x = a, y = b * (1.0 - a);
      r.points.push_back({1.0 - x - y, x, y});
      r.weights.push_back(g.weights[static_cast<std::size_t>(i)] * g.weights[static_cast<std::size_t>(j)] * (1.0 - a));
    }
  return r;
}

}  // namespace

const QuadRuleTri& tri_rule(int min_degree) {
  if (min_degree < 1 || min_degree > 12)
    throw ConfigurationError("tri_rule: unsupported degree " + std::to_string(min_degree) + " (need 1..12)");
  static std::once_flag once;
  static std::array<QuadRuleTri, 13> rules;
  std::call_once(once, [] {
    for (int d = 1; d <= 12; ++d) rules[static_cast<std::size_t>(d)] = make_conical((d + 3) / 2);
  });
  return rules[static_cast<std::size_t>(min_degree)];
}

const QuadRuleEdge& edge_rule(int n) {
  if (n < 1 || n > 10) throw ConfigurationError("edge_rule: unsupported point count " + std::to_string(n));
  static std::once_flag once;
  static std::array<QuadRuleEdge, 11> rules;
  std::call_once(once, [] {
    for (int k = 1; k <= 10; ++k) rules[static_cast<std::size_t>(k)] = make_gauss(k);
  });
  return rules[static_cast<std::size_t>(n)];
}

std::vector<QuadPoint> map_rule(const QuadRuleTri& rule, const Tri& t) {
  const double scale = 2.0 * std::abs(signed_area(t));
  std::vector<QuadPoint> out(rule.points.size());
  for (std::size_t q = 0; q < out.size(); ++q) {
    const auto& l = rule.points[q];
    out[q] = {l[0] * t[0] + l[1] * t[1] + l[2] * t[2], rule.weights[q] * scale};
  }
  return out;
}

std::vector<EdgePoint> map_rule(const QuadRuleEdge& rule, Vec2 a, Vec2 b) {
  const double len = norm(b - a);
  std::vector<EdgePoint> out(rule.points.size());
  for (std::size_t q = 0; q < out.size(); ++q) {
    const double s = rule.points[q];
    out[q] = {(1.0 - s) * a + s * b, s * len, rule.weights[q] * len};
  }
  return out;
}

Frame frame_of(const Tri& t) { return {centroid(t), diameter(t)}; }

std::vector<std::pair<int, int>> monomial_exponents(int p) {
  std::vector<std::pair<int, int>> e;
  for (int d = 0; d <= p; ++d)
    for (int j = 0; j <= d; ++j) e.emplace_back(d - j, j);
  return e;
}

ScalarBasis::ScalarBasis(int degree, Frame frame) : degree_(degree), frame_(frame), exps_(monomial_exponents(degree)) {
  if (degree < 0 || degree > 12) throw ConfigurationError("ScalarBasis: degree must lie in 0..12");
  if (!(frame.h > 0.0)) throw ConfigurationError("ScalarBasis: nonpositive frame scale");
}

void ScalarBasis::eval(Vec2 x, std::span<ScalarEval> out) const {
  const double ih = 1.0 / frame_.h;
  const double xi = (x.x - frame_.center.x) * ih;
  const double eta = (x.y - frame_.center.y) * ih;
  // Powers xi^k, eta^k with entries for k = -2, -1 kept at zero.
  std::array<double, 16> px{}, py{};
  px[2] = py[2] = 1.0;
  for (int k = 1; k <= degree_; ++k) {
    px[static_cast<std::size_t>(k + 2)] = px[static_cast<std::size_t>(k + 1)] * xi;
    py[static_cast<std::size_t>(k + 2)] = py[static_cast<std::size_t>(k + 1)] * eta;
  }
  auto X = [&](int k) { return px[static_cast<std::size_t>(k + 2)]; };
  auto Y = [&](int k) { return py[static_cast<std::size_t>(k + 2)]; };
  for (std::size_t f = 0; f < exps_.size(); ++f) {
    const auto [i, j] = exps_[f];
    ScalarEval& e = out[f];
    e.value = X(i) * Y(j);
    e.grad = {i * X(i - 1) * Y(j) * ih, j * X(i) * Y(j - 1) * ih};
    e.hess = {i * (i - 1) * X(i - 2) * Y(j) * ih * ih, i * j * X(i - 1) * Y(j - 1) * ih * ih,
              j * (j - 1) * X(i) * Y(j - 2) * ih * ih};
  }
}

std::vector<ScalarEval> ScalarBasis::eval(Vec2 x) const {
  std::vector<ScalarEval> out(size());
  eval(x, out);
  return out;
}

std::vector<ScalarEval> ScalarBasis::eval(std::span<const Vec2> xs) const {
  std::vector<ScalarEval> out(size() * xs.size());
  for (std::size_t q = 0; q < xs.size(); ++q) eval(xs[q], std::span(out).subspan(q * size(), size()));
  return out;
}

ScalarEval ScalarBasis::combine(Vec2 x, std::span<const double> c) const {
  const auto e = eval(x);
  ScalarEval r;
  for (std::size_t k = 0; k < e.size(); ++k) {
    r.value += c[k] * e[k].value;
    r.grad += c[k] * e[k].grad;
    r.hess += c[k] * e[k].hess;
  }
  return r;
}

TensorEdgeTrace edge_trace(const TensorEval& e, Vec2 t, Vec2 n) {
  TensorEdgeTrace r;
  r.theta_n = e.value.apply(n);
  r.t_theta_n = dot(t, r.theta_n);
  r.n_theta_n = dot(n, r.theta_n);
  r.n_div = dot(n, e.div);
  return r;
}

TensorBasis::TensorBasis(int degree, Frame frame) : scalar_(degree, frame) {}

void TensorBasis::from_scalar(std::span<const ScalarEval> s, std::span<TensorEval> out) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    const ScalarEval& p = s[k];
    out[3 * k + 0] = {{p.value, 0.0, 0.0}, {p.grad.x, 0.0}, p.hess.xx};
    out[3 * k + 1] = {{0.0, p.value, 0.0}, {p.grad.y, p.grad.x}, 2.0 * p.hess.xy};
    out[3 * k + 2] = {{0.0, 0.0, p.value}, {0.0, p.grad.y}, p.hess.yy};
  }
}

void TensorBasis::eval(Vec2 x, std::span<TensorEval> out) const { from_scalar(scalar_.eval(x), out); }

std::vector<TensorEval> TensorBasis::eval(Vec2 x) const {
  std::vector<TensorEval> out(size());
  eval(x, out);
  return out;
}

std::vector<TensorEval> TensorBasis::eval(std::span<const Vec2> xs) const {
  std::vector<TensorEval> out(size() * xs.size());
  for (std::size_t q = 0; q < xs.size(); ++q) eval(xs[q], std::span(out).subspan(q * size(), size()));
  return out;
}

}  // namespace platedpg
