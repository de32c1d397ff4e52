#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace platedpg {

using index_t = std::size_t;

// Row-major dense matrix.
class DenseMatrix {
public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  DenseMatrix transpose() const;
  double max_abs() const;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);

// Lower Cholesky factor L with L L^T = A. Only the lower triangle of A is
// read. Throws SpdViolation carrying the failing pivot index.
DenseMatrix dense_cholesky(const DenseMatrix& a);

// Solves L y = b in place (forward substitution).
void forward_substitute(const DenseMatrix& l, std::span<double> b);
// Solves L^T y = b in place.
void backward_substitute_transposed(const DenseMatrix& l, std::span<double> b);
// Solves A x = b for SPD A given its Cholesky factor.
std::vector<double> cholesky_solve(const DenseMatrix& l, std::span<const double> b);

struct Triplet {
  index_t row;
  index_t col;
  double value;
};

// Symmetric sparse matrix stored as compressed rows of its lower triangle
// (including the diagonal).
class SparseSymmetric {
public:
  SparseSymmetric() = default;

  // Duplicate (row, col) entries are summed. Entries above the diagonal are
  // mirrored into the lower triangle. Summation order follows the input
  // order, so identical input yields bit-identical matrices.
  static SparseSymmetric from_triplets(std::size_t n, std::span<const Triplet> triplets);

  std::size_t size() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const index_t> row_ptr() const { return row_ptr_; }
  std::span<const index_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  // Entry (i, j) of the full symmetric matrix (0 if not stored).
  double at(index_t i, index_t j) const;
  std::vector<double> diagonal() const;
  std::vector<double> multiply(std::span<const double> x) const;
  double max_abs() const;
  DenseMatrix to_dense() const;

private:
  std::size_t n_ = 0;
  std::vector<index_t> row_ptr_;
  std::vector<index_t> col_idx_;
  std::vector<double> values_;
};

enum class SolverKind { sparse_cholesky, conjugate_gradient };

struct SolveReport {
  std::size_t iterations = 0;  // 0 for a direct solve without refinement
  double relative_residual = 0.0;
  double wall_seconds = 0.0;
};

struct SolveResult {
  std::vector<double> x;
  SolveReport report;
};

// Solves A x = b for SPD A with ||A x - b|| <= tol ||b||.
//
// sparse_cholesky: Jacobi-scaled simplicial Cholesky (AMD ordering) with a
// few steps of iterative refinement (iterations = refinement steps).
// conjugate_gradient: Jacobi-preconditioned CG with an iteration cap of 10 n.
//
// Throws SpdViolation when the factorization breaks down and
// ConvergenceError when the residual bound cannot be met.
SolveResult spd_solve(const SparseSymmetric& a, std::span<const double> b, double tol = 1e-12,
                      SolverKind kind = SolverKind::sparse_cholesky);

double norm2(std::span<const double> x);

}  // namespace platedpg
