#include "platedpg/problems.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "platedpg/errors.hpp"
#include "platedpg/polyquad.hpp"

namespace platedpg {

void MaterialLaw::validate() const {
  if (!(d > 0.0)) throw ConfigurationError("material: bending rigidity D must be positive");
  if (!(nu > -1.0 && nu <= 0.5)) throw ConfigurationError("material: Poisson ratio must lie in (-1, 1/2]");
}

Sym2 MaterialLaw::c_apply(Sym2 k) const { return d * (nu * k.trace() * Sym2::identity() + (1.0 - nu) * k); }

Sym2 MaterialLaw::cinv_apply(Sym2 m) const {
  return (1.0 / (d * (1.0 - nu))) * (m - (nu / (1.0 + nu)) * m.trace() * Sym2::identity());
}

ExactValue fourier_eval(double x, double y, int n_max) {
  using std::numbers::pi;
  ExactValue r;
  double hxx = 0.0, hxy = 0.0, hyy = 0.0;
  for (int n = 0; n <= n_max; ++n) {
    const double a = 2 * n + 1;
    const double sx = std::sin(a * pi * x), cx = std::cos(a * pi * x);
    for (int m = 0; m <= n_max; ++m) {
      const double b = 2 * m + 1;
      const double sy = std::sin(b * pi * y), cy = std::cos(b * pi * y);
      const double s = a * a + b * b;
      const double c = 16.0 / std::pow(pi, 6) / (a * b * s * s);
      r.u += c * sx * sy;
      r.grad.x += c * a * pi * cx * sy;
      r.grad.y += c * b * pi * sx * cy;
      hxx -= c * a * a * pi * pi * sx * sy;
      hxy += c * a * b * pi * pi * cx * cy;
      hyy -= c * b * b * pi * pi * sx * sy;
    }
  }
  r.m = {-hxx, -hxy, -hyy};
  return r;
}

ExactValue singular_eval(double x, double y) {
  using std::numbers::pi;
  ExactValue out;
  const double r = std::hypot(x, y);
  if (r == 0.0) return out;
  double phi = std::atan2(y, x);
  if (phi < -pi / 2) phi += 2 * pi;
  if (phi < 0.0) phi = 0.0;
  const double a = kSingularAlpha, c = kSingularC;
  const double p = phi - 5.0 * pi / 8.0;
  const double f = std::cos((a + 1) * p) + c * std::cos((a - 1) * p);
  const double fp = -(a + 1) * std::sin((a + 1) * p) - c * (a - 1) * std::sin((a - 1) * p);
  const double fpp = -(a + 1) * (a + 1) * std::cos((a + 1) * p) - c * (a - 1) * (a - 1) * std::cos((a - 1) * p);
  const double lam = 1.0 + a;
  const double rl = std::pow(r, lam);
  const double u_r = lam * rl / r * f;
  const double u_p = rl * fp;
  const double u_rr = lam * (lam - 1) * rl / (r * r) * f;
  const double u_rp = lam * rl / r * fp;
  const double u_pp = rl * fpp;
  const double cs = std::cos(phi), sn = std::sin(phi);
  out.u = rl * f;
  out.grad = {cs * u_r - sn / r * u_p, sn * u_r + cs / r * u_p};
  const double uxx = cs * cs * u_rr - 2 * cs * sn / r * u_rp + sn * sn / (r * r) * u_pp + sn * sn / r * u_r +
                     2 * cs * sn / (r * r) * u_p;
  const double uyy = sn * sn * u_rr + 2 * cs * sn / r * u_rp + cs * cs / (r * r) * u_pp + cs * cs / r * u_r -
                     2 * cs * sn / (r * r) * u_p;
  const double uxy = cs * sn * u_rr + (cs * cs - sn * sn) / r * u_rp - cs * sn / (r * r) * u_pp - cs * sn / r * u_r -
                     (cs * cs - sn * sn) / (r * r) * u_p;
  out.m = {-uxx, -uxy, -uyy};
  return out;
}

namespace {

bool touches(const Tri& t, Vec2 p) {
  const double a = signed_area(t);
  const double tol = 1e-12 * diameter(t) * diameter(t);
  return signed_area({p, t[1], t[2]}) >= -tol && signed_area({t[0], p, t[2]}) >= -tol &&
         signed_area({t[0], t[1], p}) >= -tol && a > 0.0;
}

void accumulate(const Tri& t, double u_h, Sym2 m_h, const ExactSolution& ex, int depth, double& eu, double& em) {
  if (depth > 0 && ex.singular_point && touches(t, *ex.singular_point)) {
    const Vec2 m01 = 0.5 * (t[0] + t[1]), m12 = 0.5 * (t[1] + t[2]), m20 = 0.5 * (t[2] + t[0]);
    const std::array<Tri, 4> kids{Tri{t[0], m01, m20}, Tri{m01, t[1], m12}, Tri{m20, m12, t[2]}, Tri{m12, m20, m01}};
    for (const auto& k : kids) accumulate(k, u_h, m_h, ex, depth - 1, eu, em);
    return;
  }
  for (const auto& q : map_rule(tri_rule(kErrorDegree), t)) {
    const ExactValue v = ex.eval(q.x);
    const double du = v.u - u_h;
    const Sym2 dm = v.m - m_h;
    eu += q.w * du * du;
    em += q.w * contract(dm, dm);
  }
}

}  // namespace

L2Errors l2_errors(const Mesh& mesh, std::span<const double> u_h, std::span<const Sym2> m_h, const ExactSolution& exact) {
  constexpr int kCornerLevels = 4;
  double eu = 0.0, em = 0.0;
  for (index_t t = 0; t < mesh.num_triangles(); ++t) accumulate(mesh.coords(t), u_h[t], m_h[t], exact, kCornerLevels, eu, em);
  return {std::sqrt(eu), std::sqrt(em)};
}

Mesh unit_square_mesh() {
  const std::array<Vec2, 4> x{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}};
  const std::array<std::array<index_t, 3>, 2> t{{{0, 1, 2}, {0, 2, 3}}};
  return Mesh::from_arrays(x, t);
}

Mesh zshape_mesh() {
  const std::array<Vec2, 7> x{Vec2{0, 0}, Vec2{1, 0}, Vec2{1, 1}, Vec2{0, 1}, Vec2{-1, 1}, Vec2{-1, 0}, Vec2{-1, -1}};
  const std::array<std::array<index_t, 3>, 5> t{{{0, 1, 2}, {0, 2, 3}, {0, 3, 4}, {0, 4, 5}, {0, 5, 6}}};
  return Mesh::from_arrays(x, t);
}

ProblemSpec builtin_square_problem() {
  ProblemSpec p;
  p.name = "square";
  p.initial_mesh = unit_square_mesh();
  p.load = [](Vec2) { return 1.0; };
  p.bc = [](const Mesh& m) { return simply_supported_bc(m); };
  p.exact = ExactSolution{[](Vec2 x) { return fourier_eval(x.x, x.y); }, std::nullopt};
  return p;
}

ProblemSpec builtin_zshape_problem() {
  ProblemSpec p;
  p.name = "zshape";
  p.initial_mesh = zshape_mesh();
  p.load = [](Vec2) { return 0.0; };
  p.bc = [](const Mesh& m) {
    return interpolate_uhat_bc([](Vec2 x) { return singular_eval(x.x, x.y).u; },
                               [](Vec2 x) { return singular_eval(x.x, x.y).grad; }, m);
  };
  p.exact = ExactSolution{[](Vec2 x) { return singular_eval(x.x, x.y); }, Vec2{0.0, 0.0}};
  return p;
}

ProblemSpec builtin_problem(const std::string& name) {
  if (name == "square") return builtin_square_problem();
  if (name == "zshape") return builtin_zshape_problem();
  throw ConfigurationError("unknown problem '" + name + "' (expected square or zshape)");
}

}  // namespace platedpg
