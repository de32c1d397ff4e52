#pragma once

// Trial degrees of freedom, boundary constraints and skeleton pairings.
//
// Local trial vector of a triangle (22 entries):
//   0        u
//   1..3     M11, M12, M22
//   4..12    uhat: (v, dv/dx, dv/dy) per counterclockwise vertex
//   13..18   qhat: (alpha, beta) per local edge
//   19..21   qhat: gamma per counterclockwise vertex
// Local entries hold the global (unsigned) values; element-side signs are
// applied by the pairing matrices.
//
// Global (full) layout: [u | M | uhat | alpha | beta | gamma] with sizes
// #T, 3#T, 3#N, #E, #E, 3#T.

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "platedpg/geometry.hpp"
#include "platedpg/linalg.hpp"
#include "platedpg/mesh.hpp"
#include "platedpg/polyquad.hpp"

namespace platedpg {

inline constexpr std::size_t kNumTrial = 22;
inline constexpr std::size_t kNumScalarTest = 10;
inline constexpr std::size_t kNumTensorTest = 18;
inline constexpr std::size_t kNumTest = kNumScalarTest + kNumTensorTest;

namespace local {
inline constexpr std::size_t u = 0;
inline constexpr std::size_t m = 1;
inline constexpr std::size_t uhat = 4;
inline constexpr std::size_t qhat = 13;
inline constexpr std::size_t gamma = 19;
constexpr std::size_t uhat_dof(int vertex, int comp) { return uhat + 3 * static_cast<std::size_t>(vertex) + static_cast<std::size_t>(comp); }
constexpr std::size_t alpha_dof(int edge) { return qhat + 2 * static_cast<std::size_t>(edge); }
constexpr std::size_t beta_dof(int edge) { return qhat + 2 * static_cast<std::size_t>(edge) + 1; }
constexpr std::size_t gamma_dof(int vertex) { return gamma + static_cast<std::size_t>(vertex); }
}  // namespace local

using EdgeSigns = std::array<int, 3>;

EdgeSigns edge_signs(const Mesh& mesh, index_t t);

// Geometry of local edge k of a counterclockwise triangle.
struct LocalEdge {
  Vec2 a, b;  // start and end (counterclockwise)
  Vec2 t, n;  // unit tangent and outward normal
  double length;
};
LocalEdge local_edge(const Tri& x, int k);

// ---- uhat ----------------------------------------------------------------

struct UhatVertex {
  double v = 0.0;
  Vec2 grad;
};

// P[i][j] = <uhat_j, Theta_i>_{dT} for the 18 P2 tensor tests and the 9
// local uhat unit DOFs:
//   sum_E int_E (n . div Theta) z_E - (t . Theta n) z_E' - (n . Theta n) g_E
// with z_E the Hermite cubic of the endpoint values and tangential slopes and
// g_E the linear interpolant of the endpoint normal derivatives.
DenseMatrix uhat_pair_matrix(const Tri& x);

double uhat_pair_local(const Tri& x, const std::array<UhatVertex, 3>& udofs, std::span<const double> theta);

// ---- qhat ----------------------------------------------------------------

// Signed local values: alpha[k] and beta[k] carry the element-side sign of
// edge k, gamma[c] is the corner value at local vertex c.
struct QhatLocal {
  std::array<double, 3> alpha{};
  std::array<double, 3> beta{};
  std::array<double, 3> gamma{};
};

// Q[i][j] = <qhat_j, z_i>_{dT} for the 10 P3 tests and the 9 local qhat
// DOFs in global (unsigned) form.
DenseMatrix qhat_pair_matrix(const Tri& x, const EdgeSigns& signs);

// sum_E [ alpha_E/|E| int_E z - beta_E/|E| int_E n_E . grad z ] - sum_e gamma_e z(e)
// with n_E the canonical edge normal.
double qhat_pair_local(const Tri& x, const EdgeSigns& signs, const QhatLocal& q, std::span<const double> z);

using TensorField = std::function<Sym2(Vec2)>;
using VectorField = std::function<Vec2(Vec2)>;
using ScalarField = std::function<double(Vec2)>;

// qhat DOFs of a smooth tensor field M restricted to one triangle, as signed
// local values:
//   alpha_T = int_E n . div M + (t . M n)(b) - (t . M n)(a)
//   beta    = s int_E n . M n
//   gamma_e = (t . M n)|_{E arriving at e} - (t . M n)|_{E leaving e}
QhatLocal qhat_from_tensor(const Tri& x, const EdgeSigns& signs, const TensorField& m, const VectorField& div_m);

// ---- boundary conditions ---------------------------------------------------

struct VertexConstraint {
  index_t vertex;
  std::array<double, 3> coeffs;  // functional on (v, dv/dx, dv/dy)
  double value;
};

struct EdgeConstraint {
  index_t edge;
  std::array<double, 2> coeffs;  // functional on (alpha_E, beta_E)
  double value;
};

struct BCSpec {
  std::vector<VertexConstraint> vertex;
  std::vector<EdgeConstraint> edge;

  std::size_t size() const { return vertex.size() + edge.size(); }
};

// Prescribes (v, grad v) = (u, grad u) at every boundary vertex.
BCSpec interpolate_uhat_bc(const ScalarField& u, const VectorField& grad_u, const Mesh& mesh);

// u = 0 and n . M n = 0 on the boundary: v = 0 and the tangential derivative
// at side vertices, v = 0 and the full gradient at corners, beta = 0 on
// boundary edges.
BCSpec simply_supported_bc(const Mesh& mesh);

// ---- DOF map ---------------------------------------------------------------

enum class Block { u = 0, m, uhat, alpha, beta, gamma };
inline constexpr std::size_t kNumBlocks = 6;

class DofMap {
public:
  // Throws ConfigurationError if the constraints on one vertex or edge are
  // linearly dependent or reference missing entities.
  static DofMap build(const Mesh& mesh, const BCSpec& bc);

  std::size_t num_full() const noexcept { return shift_.size(); }
  std::size_t num_free() const noexcept { return num_free_; }
  std::size_t block_offset(Block b) const { return offset_[static_cast<std::size_t>(b)]; }
  std::size_t block_size(Block b) const {
    return offset_[static_cast<std::size_t>(b) + 1] - offset_[static_cast<std::size_t>(b)];
  }
  // Number of free DOFs whose defining full DOF lies in block b.
  std::size_t free_in_block(Block b) const {
    return free_offset_[static_cast<std::size_t>(b) + 1] - free_offset_[static_cast<std::size_t>(b)];
  }

  index_t u_dof(index_t t) const { return t; }
  index_t m_dof(index_t t, int c) const { return offset_[1] + 3 * t + static_cast<index_t>(c); }
  index_t uhat_dof(index_t v, int c) const { return offset_[2] + 3 * v + static_cast<index_t>(c); }
  index_t alpha_dof(index_t e) const { return offset_[3] + e; }
  index_t beta_dof(index_t e) const { return offset_[4] + e; }
  index_t gamma_dof(index_t t, int c) const { return offset_[5] + 3 * t + static_cast<index_t>(c); }

  // Full DOF ids of the 22 local trial entries of triangle t.
  const std::array<index_t, kNumTrial>& local_dofs(index_t t) const { return local_dofs_[t]; }

  // Affine reduction: x_full[i] = sum_k value_k * x_free[col_k] + shift[i].
  std::span<const index_t> row_cols(index_t i) const {
    return std::span(col_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }
  std::span<const double> row_values(index_t i) const {
    return std::span(val_).subspan(row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]);
  }
  std::span<const double> shift() const { return shift_; }

  std::vector<double> expand(std::span<const double> free) const;

  // Local view of the reduction on triangle t: x_local = P x_free[cols] + s.
  struct LocalReduction {
    std::vector<index_t> cols;
    DenseMatrix p;  // 22 x cols.size()
    std::array<double, kNumTrial> shift{};
  };
  LocalReduction local_reduction(index_t t) const;

private:
  std::array<std::size_t, kNumBlocks + 1> offset_{};
  std::array<std::size_t, kNumBlocks + 1> free_offset_{};
  std::size_t num_free_ = 0;
  std::vector<index_t> row_ptr_;
  std::vector<index_t> col_;
  std::vector<double> val_;
  std::vector<double> shift_;
  std::vector<std::array<index_t, kNumTrial>> local_dofs_;
};

// Full DOF vector of a smooth solution: element means of u and M, nodal
// (u, grad u) for uhat, and qhat moments and corner jumps of M.
struct SmoothFields {
  ScalarField u;
  VectorField grad_u;
  TensorField m;
  VectorField div_m;
};
std::vector<double> interpolate_full(const Mesh& mesh, const DofMap& dofs, const SmoothFields& fields);

}  // namespace platedpg
