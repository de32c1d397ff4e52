#pragma once

// Element matrices of the ultraweak DPG method and global assembly.
//
// Test space per triangle: P3 scalars z (10 scaled monomials) followed by P2
// symmetric tensors Theta (18). The tensor tests are the TensorBasis
// functions except that entries 13 (xi eta E12) and 17 (eta^2 E22) have
// entry 9 (xi^2 E11) subtracted, so only entry 9 has nonzero divdiv. Bilinear form and load:
//   b = (M, Hess z + C^{-1} Theta) + (u, div div Theta) + <qhat, z> - <uhat, Theta>
//   l = -(f, z)
// The global system is the normal equation A = sum B^T G^{-1} B over
// elements, restricted to the free DOFs of the DofMap.

#include <cstddef>
#include <span>
#include <vector>

#include "platedpg/linalg.hpp"
#include "platedpg/mesh.hpp"
#include "platedpg/problems.hpp"
#include "platedpg/spaces.hpp"

namespace platedpg {

struct LocalSystem {
  DenseMatrix b;              // 28 x 22
  DenseMatrix g;              // 28 x 28
  std::vector<double> load;   // 28
};

DenseMatrix local_b(const Tri& x, const EdgeSigns& signs, const MaterialLaw& material);
DenseMatrix local_gram(const Tri& x);
std::vector<double> local_load(const Tri& x, const ScalarField& f);
LocalSystem local_system(const Mesh& mesh, index_t t, const ProblemSpec& problem);

struct Condensed {
  DenseMatrix a;           // B^T G^{-1} B
  std::vector<double> b;   // B^T G^{-1} load
};

// Throws SpdViolation if G is not positive definite.
Condensed condense(const LocalSystem& local);

// Triangular solve with the Gram factor: W = L^{-1} B, w = L^{-1} load,
// where G = L L^T.
struct Whitened {
  DenseMatrix w;
  std::vector<double> rhs;
};
Whitened whiten(const LocalSystem& local);

struct AssemblyOptions {
  // 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

// The unknowns y of the global system are the free DOFs of the DofMap
// rescaled to unit diagonal: x_free = scale * y. Without this the DOF blocks
// differ by several powers of h and a relative residual of 1e-12 is below
// the rounding floor of the unscaled system on fine meshes.
struct GlobalSystem {
  SparseSymmetric a;
  std::vector<double> rhs;
  std::vector<double> scale;

  std::vector<double> unscale(std::span<const double> y) const;
};

// Scatter order follows triangle ids, so the result does not depend on the
// number of threads.
GlobalSystem assemble(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& problem, const AssemblyOptions& opt = {});

// Per-element estimator eta_T = || L^{-1}(load - B x_T) ||.
std::vector<double> estimate(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& problem,
                             std::span<const double> x_full, const AssemblyOptions& opt = {});

struct Solution {
  std::vector<double> x_free;
  std::vector<double> x_full;
  std::vector<double> eta;  // per element
  double eta_total = 0.0;
  SolveReport report;
  double normal_residual = 0.0;  // ||A x - rhs|| / ||rhs||

  double u(const DofMap& d, index_t t) const { return x_full[d.u_dof(t)]; }
  Sym2 m(const DofMap& d, index_t t) const {
    return {x_full[d.m_dof(t, 0)], x_full[d.m_dof(t, 1)], x_full[d.m_dof(t, 2)]};
  }
};

struct SolveOptions {
  double tol = 1e-12;
  SolverKind solver = SolverKind::sparse_cholesky;
  AssemblyOptions assembly;
};

Solution solve(const Mesh& mesh, const DofMap& dofs, const ProblemSpec& problem, const SolveOptions& opt = {});

}  // namespace platedpg
