#pragma once

// Material law, benchmark problems and L2 field errors.

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "platedpg/geometry.hpp"
#include "platedpg/mesh.hpp"
#include "platedpg/spaces.hpp"

namespace platedpg {

// Isotropic bending law C k = D (nu tr(k) I + (1 - nu) k).
struct MaterialLaw {
  double d = 1.0;
  double nu = 0.0;

  // Throws ConfigurationError unless D > 0 and nu in (-1, 1/2].
  void validate() const;
  Sym2 c_apply(Sym2 k) const;
  Sym2 cinv_apply(Sym2 m) const;
};

struct ExactValue {
  double u = 0.0;
  Vec2 grad;
  Sym2 m;
};

struct ExactSolution {
  std::function<ExactValue(Vec2)> eval;
  // Point where the solution is singular; elements touching it get a
  // refined error quadrature.
  std::optional<Vec2> singular_point;
};

struct ProblemSpec {
  std::string name;
  Mesh initial_mesh;
  MaterialLaw material;
  ScalarField load;
  std::function<BCSpec(const Mesh&)> bc;
  std::optional<ExactSolution> exact;
};

// Simply supported unit square under unit load: truncated double sine
// series, a = 2n + 1, b = 2m + 1, n, m = 0..n_max,
//   u = 16/pi^6 sum sin(a pi x) sin(b pi y) / (a b (a^2 + b^2)^2),
// with M = -Hess u.
ExactValue fourier_eval(double x, double y, int n_max = 15);

// Corner singularity of the clamped Z-shape with opening angle 5 pi / 4 at
// the origin:
//   u = r^(1+a) (cos((a+1) p) + C cos((a-1) p)),  p = phi - 5 pi / 8,
// phi in [0, 5 pi / 4] measured from the edge towards (1, 0). M = -Hess u.
inline constexpr double kSingularAlpha = 0.673583432147380388934530183272;
inline constexpr double kSingularC = 1.23458779527372309147476256303;
inline constexpr double kZshapeOmega = 5.0 * 3.14159265358979323846 / 4.0;
ExactValue singular_eval(double x, double y);

struct L2Errors {
  double u = 0.0;
  double m = 0.0;
};

// ||u - u_h|| and ||M - M_h|| (Frobenius) for piecewise constant fields.
L2Errors l2_errors(const Mesh& mesh, std::span<const double> u_h, std::span<const Sym2> m_h, const ExactSolution& exact);

ProblemSpec builtin_square_problem();
ProblemSpec builtin_zshape_problem();
ProblemSpec builtin_problem(const std::string& name);

Mesh unit_square_mesh();
Mesh zshape_mesh();

}  // namespace platedpg
