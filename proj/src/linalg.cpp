#include "platedpg/linalg.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <cstdio>
#include <string>

#include "platedpg/errors.hpp"
#include "platedpg/kernels.hpp"

namespace platedpg {

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double DenseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c(a.rows(), b.cols());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t l = 0; l < a.cols(); ++l) k.axpy(a(i, l), b.row(l).data(), c.row(i).data(), b.cols());
  return c;
}

std::vector<double> operator*(const DenseMatrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  const auto& k = kernels::active();
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = k.dot(a.row(i).data(), x.data(), a.cols());
  return y;
}

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix c = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) -= b(i, j);
  return c;
}

DenseMatrix dense_cholesky(const DenseMatrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw ConfigurationError("dense_cholesky: matrix is not square");
  DenseMatrix l(n, n);
  const auto& k = kernels::active();
  for (std::size_t j = 0; j < n; ++j) {
    const double d = a(j, j) - k.dot(l.row(j).data(), l.row(j).data(), j);
    if (!(d > 0.0))
      throw SpdViolation(j, "Cholesky breakdown: nonpositive pivot " + std::to_string(d) + " at index " +
                                std::to_string(j));
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i)
      l(i, j) = (a(i, j) - k.dot(l.row(i).data(), l.row(j).data(), j)) / ljj;
  }
  return l;
}

void forward_substitute(const DenseMatrix& l, std::span<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * b[k];
    b[i] = s / l(i, i);
  }
}

void backward_substitute_transposed(const DenseMatrix& l, std::span<double> b) {
  const std::size_t n = l.rows();
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * b[k];
    b[ii] = s / l(ii, ii);
  }
}

std::vector<double> cholesky_solve(const DenseMatrix& l, std::span<const double> b) {
  std::vector<double> x(b.begin(), b.end());
  forward_substitute(l, x);
  backward_substitute_transposed(l, x);
  return x;
}

SparseSymmetric SparseSymmetric::from_triplets(std::size_t n, std::span<const Triplet> triplets) {
  SparseSymmetric m;
  m.n_ = n;
  std::vector<index_t> count(n + 1, 0);
  for (const auto& t : triplets) {
    const index_t r = std::max(t.row, t.col);
    if (r >= n) throw ConfigurationError("SparseSymmetric: triplet index out of range");
    ++count[r + 1];
  }
  std::partial_sum(count.begin(), count.end(), count.begin());

  // Bucket by row, preserving input order.
  std::vector<index_t> cols(triplets.size());
  std::vector<double> vals(triplets.size());
  std::vector<index_t> fill(count.begin(), count.end() - 1);
  for (const auto& t : triplets) {
    const index_t r = std::max(t.row, t.col);
    const index_t c = std::min(t.row, t.col);
    cols[fill[r]] = c;
    vals[fill[r]] = t.value;
    ++fill[r];
  }

  m.row_ptr_.assign(n + 1, 0);
  std::vector<index_t> order;
  for (index_t r = 0; r < n; ++r) {
    const index_t b = count[r], e = count[r + 1];
    order.resize(e - b);
    std::iota(order.begin(), order.end(), b);
    std::stable_sort(order.begin(), order.end(), [&](index_t p, index_t q) { return cols[p] < cols[q]; });
    for (std::size_t k = 0; k < order.size(); ++k) {
      const index_t p = order[k];
      if (k > 0 && cols[p] == m.col_idx_.back()) {
        m.values_.back() += vals[p];
      } else {
        m.col_idx_.push_back(cols[p]);
        m.values_.push_back(vals[p]);
      }
    }
    m.row_ptr_[r + 1] = m.col_idx_.size();
  }
  return m;
}

double SparseSymmetric::at(index_t i, index_t j) const {
  const index_t r = std::max(i, j), c = std::min(i, j);
  const auto b = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto e = col_idx_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(b, e, c);
  if (it == e || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

std::vector<double> SparseSymmetric::diagonal() const {
  std::vector<double> d(n_, 0.0);
  for (index_t r = 0; r < n_; ++r)
    if (row_ptr_[r + 1] > row_ptr_[r] && col_idx_[row_ptr_[r + 1] - 1] == r) d[r] = values_[row_ptr_[r + 1] - 1];
  return d;
}

std::vector<double> SparseSymmetric::multiply(std::span<const double> x) const {
  std::vector<double> y(n_, 0.0);
  for (index_t r = 0; r < n_; ++r) {
    double s = 0.0;
    for (index_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const index_t c = col_idx_[p];
      s += values_[p] * x[c];
      if (c != r) y[c] += values_[p] * x[r];
    }
    y[r] += s;
  }
  return y;
}

double SparseSymmetric::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

DenseMatrix SparseSymmetric::to_dense() const {
  DenseMatrix d(n_, n_);
  for (index_t r = 0; r < n_; ++r)
    for (index_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      d(r, col_idx_[p]) = values_[p];
      d(col_idx_[p], r) = values_[p];
    }
  return d;
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Residual b - A x accumulated in extended precision; the rounding error of a
// plain double product would otherwise dominate near the requested tolerance.
double relative_residual(const SparseSymmetric& a, std::span<const double> x, std::span<const double> b,
                         std::vector<double>& r) {
  const std::size_t n = a.size();
  std::vector<long double> acc(b.begin(), b.end());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto va = a.values();
  for (index_t row = 0; row < n; ++row)
    for (index_t p = rp[row]; p < rp[row + 1]; ++p) {
      const index_t c = ci[p];
      acc[row] -= static_cast<long double>(va[p]) * x[c];
      if (c != row) acc[c] -= static_cast<long double>(va[p]) * x[row];
    }
  r.resize(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = static_cast<double>(acc[i]);
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

SolveResult solve_direct(const SparseSymmetric& a, std::span<const double> b, double tol) {
  const std::size_t n = a.size();
  std::vector<double> scale = a.diagonal();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(scale[i] > 0.0)) throw SpdViolation(i, "spd_solve: nonpositive diagonal entry at index " + std::to_string(i));
    scale[i] = 1.0 / std::sqrt(scale[i]);
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(a.nonzeros());
  const auto rp = a.row_ptr();
  const auto ci = a.col_idx();
  const auto va = a.values();
  for (index_t r = 0; r < n; ++r)
    for (index_t p = rp[r]; p < rp[r + 1]; ++p)
      trip.emplace_back(static_cast<int>(r), static_cast<int>(ci[p]), va[p] * scale[r] * scale[ci[p]]);
  Eigen::SparseMatrix<double> s(static_cast<int>(n), static_cast<int>(n));
  s.setFromTriplets(trip.begin(), trip.end());

  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower> llt(s);
  if (llt.info() != Eigen::Success) throw SpdViolation(0, "spd_solve: sparse Cholesky factorization failed (matrix not SPD)");

  SolveResult out;
  out.x.assign(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  double res = norm2(b) > 0.0 ? 1.0 : 0.0;
  constexpr std::size_t kMaxRefinements = 5;
  for (std::size_t step = 0; step <= kMaxRefinements; ++step) {
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) rhs[static_cast<Eigen::Index>(i)] = r[i] * scale[i];
    const Eigen::VectorXd d = llt.solve(rhs);
    for (std::size_t i = 0; i < n; ++i) out.x[i] += d[static_cast<Eigen::Index>(i)] * scale[i];
    res = relative_residual(a, out.x, b, r);
    out.report.iterations = step;
    if (res <= tol) break;
  }
  out.report.relative_residual = res;
  if (!(res <= tol))
    throw ConvergenceError("spd_solve: residual " + sci(res) + " above tolerance after refinement");
  return out;
}

SolveResult solve_cg(const SparseSymmetric& a, std::span<const double> b, double tol) {
  const std::size_t n = a.size();
  std::vector<double> dinv = a.diagonal();
  for (std::size_t i = 0; i < n; ++i) {
    if (!(dinv[i] > 0.0)) throw SpdViolation(i, "spd_solve: nonpositive diagonal entry at index " + std::to_string(i));
    dinv[i] = 1.0 / dinv[i];
  }
  SolveResult out;
  out.x.assign(n, 0.0);
  const double nb = norm2(b);
  if (nb == 0.0) return out;

  std::vector<double> r(b.begin(), b.end()), z(n), p(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
  p = z;
  double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
  const std::size_t cap = 10 * n;
  for (std::size_t it = 1; it <= cap; ++it) {
    const std::vector<double> ap = a.multiply(p);
    const double pap = std::inner_product(p.begin(), p.end(), ap.begin(), 0.0);
    if (!(pap > 0.0)) throw SpdViolation(it, "spd_solve: CG encountered nonpositive curvature");
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    out.report.iterations = it;
    out.report.relative_residual = norm2(r) / nb;
    if (out.report.relative_residual <= tol) {
      // Recompute the true residual to guard against drift of the recurrence.
      out.report.relative_residual = relative_residual(a, out.x, b, r);
      if (out.report.relative_residual <= tol) return out;
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = dinv[i] * r[i];
    const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw ConvergenceError("spd_solve: CG did not converge within " + std::to_string(cap) +
                         " iterations (relative residual " + sci(out.report.relative_residual) + ")");
}

}  // namespace

SolveResult spd_solve(const SparseSymmetric& a, std::span<const double> b, double tol, SolverKind kind) {
  if (b.size() != a.size()) throw ConfigurationError("spd_solve: dimension mismatch");
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult out = kind == SolverKind::sparse_cholesky ? solve_direct(a, b, tol) : solve_cg(a, b, tol);
  out.report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace platedpg
