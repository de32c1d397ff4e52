#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "platedpg/errors.hpp"
#include "platedpg/polyquad.hpp"
#include "support.hpp"

using namespace platedpg;
using testsupport::kReference;

namespace {

double integrate(const Tri& t, int degree, auto&& f) {
  double s = 0.0;
  for (const auto& q : map_rule(tri_rule(degree), t)) s += q.w * f(q.x);
  return s;
}

// Composite midpoint-free oracle: split the reference triangle into m^2
// congruent subtriangles and apply the centroid-exact 3-point edge-midpoint
// rule on each, then Richardson-extrapolate (error is O(m^-2)).
double subdivision_oracle(auto&& f, int m) {
  auto composite = [&](int k) {
    const double h = 1.0 / k;
    double s = 0.0;
    auto tri = [&](Vec2 a, Vec2 b, Vec2 c) {
      const double area = 0.5 * std::abs(cross(b - a, c - a));
      s += area / 3.0 * (f(0.5 * (a + b)) + f(0.5 * (b + c)) + f(0.5 * (c + a)));
    };
    for (int i = 0; i < k; ++i)
      for (int j = 0; i + j < k; ++j) {
        const Vec2 p{i * h, j * h};
        tri(p, p + Vec2{h, 0}, p + Vec2{0, h});
        if (i + j + 1 < k) tri(p + Vec2{h, 0}, p + Vec2{h, h}, p + Vec2{0, h});
      }
    return s;
  };
  const double a = composite(m), b = composite(2 * m), c = composite(4 * m);
  // Two Richardson steps for error expansion in h^2, h^4.
  const double r1 = (4 * b - a) / 3, r2 = (4 * c - b) / 3;
  return (16 * r2 - r1) / 15;
}

// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!
double ref_monomial(int a, int b) {
  return std::tgamma(a + 1.0) * std::tgamma(b + 1.0) / std::tgamma(a + b + 3.0);
}

}  // namespace

TEST_SUITE("polyquad") {
  TEST_CASE("triangle rule examples") {
    CHECK(integrate(kReference, 1, [](Vec2) { return 1.0; }) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(integrate(kReference, 3, [](Vec2 p) { return p.x * p.x * p.y; }) ==
          doctest::Approx(1.0 / 60.0).epsilon(1e-14));
    auto f8 = [](Vec2 p) { return std::pow(p.x + p.y, 8); };
    // Closed form: int_0^1 s^8 * s ds = 1/10.
    const double oracle = subdivision_oracle(f8, 64);
    CHECK(std::abs(oracle - 0.1) <= 1e-10);
    CHECK(std::abs(integrate(kReference, 8, f8) - oracle) <= 1e-10);
  }

  TEST_CASE("triangle rules are exact for all monomials up to their degree") {
    for (int d = 1; d <= 12; ++d) {
      const auto& rule = tri_rule(d);
      CHECK(rule.degree >= d);
      double wsum = 0.0;
      for (double w : rule.weights) wsum += w;
      CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
      for (int a = 0; a <= rule.degree; ++a)
        for (int b = 0; a + b <= rule.degree; ++b) {
          const double q = integrate(kReference, d, [&](Vec2 p) { return std::pow(p.x, a) * std::pow(p.y, b); });
          CAPTURE(d);
          CAPTURE(a);
          CAPTURE(b);
          CHECK(std::abs(q - ref_monomial(a, b)) <= 1e-13 * ref_monomial(a, b));
        }
    }
  }

  TEST_CASE("triangle rules after affine maps") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const Tri t = testsupport::random_triangle(rng);
      const double area = signed_area(t);
      // Pull x^a y^b back to the reference triangle with the 12-degree rule
      // as oracle; compare to the 8-degree rule on a degree-8 integrand.
      const Vec2 c = centroid(t);
      const double h = diameter(t);
      auto f = [&](Vec2 p) {
        const double x = (p.x - c.x) / h, y = (p.y - c.y) / h;
        return std::pow(x, 5) * std::pow(y, 3) - 2.0 * x * x + 1.0;
      };
      const double hi = integrate(t, 12, f);
      CHECK(integrate(t, 8, f) == doctest::Approx(hi).epsilon(1e-13));
      CHECK(integrate(t, 1, [](Vec2) { return 1.0; }) == doctest::Approx(area).epsilon(1e-14));
    }
  }

  TEST_CASE("unsupported degrees") {
    CHECK_THROWS_AS(tri_rule(0), ConfigurationError);
    CHECK_THROWS_AS(tri_rule(13), ConfigurationError);
    CHECK_THROWS_AS(edge_rule(0), ConfigurationError);
    CHECK_THROWS_AS(edge_rule(11), ConfigurationError);
  }

  TEST_CASE("edge rule examples and exactness") {
    auto integ = [](int n, int k) {
      const auto& r = edge_rule(n);
      double s = 0.0;
      for (std::size_t i = 0; i < r.points.size(); ++i) s += r.weights[i] * std::pow(r.points[i], k);
      return s;
    };
    CHECK(integ(1, 0) == doctest::Approx(1.0));
    CHECK(integ(2, 3) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(std::abs(integ(5, 8) - 1.0 / 9.0) <= 1e-14);
    for (int n = 1; n <= 10; ++n) {
      CHECK(edge_rule(n).degree == 2 * n - 1);
      for (int k = 0; k <= 2 * n - 1; ++k) CHECK(std::abs(integ(n, k) - 1.0 / (k + 1)) <= 1e-14);
    }
    const auto pts = map_rule(edge_rule(3), Vec2{1, 1}, Vec2{4, 5});
    double w = 0.0;
    for (const auto& p : pts) w += p.w;
    CHECK(w == doctest::Approx(5.0));
  }

  TEST_CASE("scalar Hessian examples") {
    // Unit frame at the origin turns the scaled monomials into plain ones.
    const ScalarBasis b(3, Frame{Vec2{0, 0}, 1.0});
    const auto e = b.eval(Vec2{0.3, -0.7});
    // index 3 = x^2, 4 = xy, 6 = x^3
    CHECK(e[3].hess.xx == 2.0);
    CHECK(e[3].hess.xy == 0.0);
    CHECK(e[3].hess.yy == 0.0);
    CHECK(e[4].hess.xx == 0.0);
    CHECK(e[4].hess.xy == 1.0);
    CHECK(e[4].hess.yy == 0.0);

    const Tri t{Vec2{0.2, 0.1}, Vec2{1.4, 0.3}, Vec2{0.5, 1.1}};
    const ScalarBasis s(3, t);
    const Frame f = s.frame();
    const auto v = s.eval(f.center + f.h * Vec2{1, 0});
    CHECK(v[6].hess.xx == doctest::Approx(6.0 / (f.h * f.h)));
    CHECK(v[6].hess.xy == 0.0);
    CHECK(v[6].hess.yy == 0.0);
    CHECK(v[6].value == doctest::Approx(1.0));
  }

  TEST_CASE("scalar derivatives against finite differences") {
    std::mt19937_64 rng(3);
    const Tri t = testsupport::random_triangle(rng);
    const ScalarBasis b(3, t);
    const Vec2 x = centroid(t) + 0.1 * diameter(t) * Vec2{0.3, -0.2};
    const double d = 1e-4 * diameter(t);
    const auto e = b.eval(x);
    const auto ex = b.eval(x + Vec2{d, 0}), emx = b.eval(x - Vec2{d, 0});
    const auto ey = b.eval(x + Vec2{0, d}), emy = b.eval(x - Vec2{0, d});
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double scale = 1.0 / (diameter(t) * diameter(t));
      CHECK(std::abs((ex[k].value - emx[k].value) / (2 * d) - e[k].grad.x) <= 1e-6 / diameter(t));
      CHECK(std::abs((ey[k].value - emy[k].value) / (2 * d) - e[k].grad.y) <= 1e-6 / diameter(t));
      CHECK(std::abs((ex[k].grad.x - emx[k].grad.x) / (2 * d) - e[k].hess.xx) <= 1e-6 * scale);
      CHECK(std::abs((ex[k].grad.y - emx[k].grad.y) / (2 * d) - e[k].hess.xy) <= 1e-6 * scale);
      CHECK(std::abs((ey[k].grad.y - emy[k].grad.y) / (2 * d) - e[k].hess.yy) <= 1e-6 * scale);
    }
  }

  TEST_CASE("tensor divdiv and trace examples") {
    const TensorBasis b(2, Frame{Vec2{0, 0}, 1.0});
    const Vec2 x{0.4, 0.9};
    const auto e = b.eval(x);
    // x^2 is scalar index 3, y^2 index 5; slot E11 = 0, E12 = 1, E22 = 2.
    CHECK(e[3 * 3 + 0].divdiv + e[3 * 5 + 2].divdiv == doctest::Approx(4.0));
    // [[0,xy],[xy,0]]: xy is scalar index 4 in slot E12.
    CHECK(e[3 * 4 + 1].divdiv == doctest::Approx(2.0));
    CHECK(e[3 * 4 + 1].value.xy == doctest::Approx(x.x * x.y));
    CHECK(e[3 * 4 + 1].div.x == doctest::Approx(x.x));
    CHECK(e[3 * 4 + 1].div.y == doctest::Approx(x.y));

    const TensorEval c{Sym2{1, 0, 0}, Vec2{}, 0.0};
    auto tr = edge_trace(c, Vec2{1, 0}, Vec2{0, 1});
    CHECK(tr.n_theta_n == 0.0);
    CHECK(tr.t_theta_n == 0.0);
    tr = edge_trace(c, Vec2{0, 1}, Vec2{1, 0});
    CHECK(tr.n_theta_n == 1.0);
  }

  TEST_CASE("degree-2 tensor divergences are affine, divdiv constant") {
    std::mt19937_64 rng(23);
    const Tri t = testsupport::random_triangle(rng);
    const TensorBasis b(2, t);
    const Vec2 c = centroid(t);
    const double h = diameter(t);
    const auto e0 = b.eval(c), e1 = b.eval(c + 0.2 * h * Vec2{1, 0}), e2 = b.eval(c + 0.2 * h * Vec2{0, 1});
    const auto e3 = b.eval(c + 0.2 * h * Vec2{1, 1});
    for (std::size_t k = 0; k < b.size(); ++k) {
      CHECK(e1[k].divdiv == doctest::Approx(e0[k].divdiv));
      CHECK(e2[k].divdiv == doctest::Approx(e0[k].divdiv));
      const Vec2 aff = e1[k].div + e2[k].div - e0[k].div;
      CHECK(aff.x == doctest::Approx(e3[k].div.x));
      CHECK(aff.y == doctest::Approx(e3[k].div.y));
    }
  }

  TEST_CASE("mass matrices are SPD with moderate condition numbers") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      const Tri t = testsupport::random_triangle(rng);
      const auto pts = map_rule(tri_rule(kAssemblyDegree), t);
      const ScalarBasis s(3, t);
      const TensorBasis tb(2, t);
      Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(10, 10), mt = Eigen::MatrixXd::Zero(18, 18);
      for (const auto& q : pts) {
        const auto se = s.eval(q.x);
        const auto te = tb.eval(q.x);
        for (int i = 0; i < 10; ++i)
          for (int j = 0; j < 10; ++j) ms(i, j) += q.w * se[i].value * se[j].value;
        for (int i = 0; i < 18; ++i)
          for (int j = 0; j < 18; ++j) mt(i, j) += q.w * contract(te[i].value, te[j].value);
      }
      for (const Eigen::MatrixXd* m : {&ms, &mt}) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*m);
        const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
        CHECK(lo > 0.0);
        CHECK(hi / lo < 1e8);
      }
    }
  }

  TEST_CASE("divdiv of a Hessian is the bilaplacian") {
    // v = sum c_ij x^i y^j, degree <= 4, unit frame.
    std::mt19937_64 rng(77);
    std::normal_distribution<double> g;
    const ScalarBasis s4(4, Frame{Vec2{0, 0}, 1.0});
    const auto exps = monomial_exponents(4);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> c(exps.size());
      for (auto& v : c) v = g(rng);
      // Hessian of v as a tensor field whose entries are degree-2 polynomials.
      // Expand each entry in the degree-2 scalar basis and build the tensor
      // coefficient vector (slots E11, E12 (off-diagonal value), E22).
      const auto exps2 = monomial_exponents(2);
      std::vector<double> tc(3 * exps2.size(), 0.0);
      auto add = [&](int i, int j, double coef, int slot) {
        for (std::size_t k = 0; k < exps2.size(); ++k)
          if (exps2[k] == std::pair{i, j}) tc[3 * k + static_cast<std::size_t>(slot)] += coef;
      };
      for (std::size_t k = 0; k < exps.size(); ++k) {
        const auto [i, j] = exps[k];
        if (i >= 2) add(i - 2, j, c[k] * i * (i - 1), 0);
        if (i >= 1 && j >= 1) add(i - 1, j - 1, c[k] * i * j, 1);
        if (j >= 2) add(i, j - 2, c[k] * j * (j - 1), 2);
      }
      // Direct fourth derivatives: v_xxxx + 2 v_xxyy + v_yyyy.
      double bilap = 0.0;
      for (std::size_t k = 0; k < exps.size(); ++k) {
        const auto [i, j] = exps[k];
        if (i == 4 && j == 0) bilap += 24 * c[k];
        if (i == 2 && j == 2) bilap += 2 * 4 * c[k];
        if (i == 0 && j == 4) bilap += 24 * c[k];
      }
      const TensorBasis tb(2, Frame{Vec2{0, 0}, 1.0});
      for (Vec2 x : {Vec2{0.1, 0.2}, Vec2{-0.5, 0.7}, Vec2{0.9, -0.3}}) {
        const auto te = tb.eval(x);
        double dd = 0.0;
        Sym2 val;
        for (std::size_t k = 0; k < te.size(); ++k) {
          dd += tc[k] * te[k].divdiv;
          val += tc[k] * te[k].value;
        }
        CHECK(dd == doctest::Approx(bilap).epsilon(1e-12));
        const auto h = s4.combine(x, c).hess;
        CHECK(val.xx == doctest::Approx(h.xx));
        CHECK(val.xy == doctest::Approx(h.xy));
        CHECK(val.yy == doctest::Approx(h.yy));
      }
    }
  }
}
