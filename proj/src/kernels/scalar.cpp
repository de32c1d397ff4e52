#include "platedpg/kernels.hpp"

namespace platedpg::kernels {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void sym_rank1(double w, const double* v, std::size_t n, double* g, std::size_t ldg) {
  for (std::size_t i = 0; i < n; ++i) axpy(w * v[i], v, g + i * ldg, n);
}

void trsm_lower(const double* l, std::size_t n, double* x, std::size_t ncols) {
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x + i * ncols;
    for (std::size_t k = 0; k < i; ++k) axpy(-l[i * n + k], x + k * ncols, xi, ncols);
    const double inv = 1.0 / l[i * n + i];
    for (std::size_t j = 0; j < ncols; ++j) xi[j] *= inv;
  }
}

void gram_tn(const double* x, std::size_t rows, std::size_t cols, double* c) {
  for (std::size_t j = 0; j < cols * cols; ++j) c[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) sym_rank1(1.0, x + i * cols, cols, c, cols);
}

void gemv_t(const double* x, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) axpy(v[i], x + i * cols, y, cols);
}

constexpr Table kScalar{Isa::scalar, dot, axpy, sym_rank1, trsm_lower, gram_tn, gemv_t};

}  // namespace

const Table& detail::scalar_table() { return kScalar; }

}  // namespace platedpg::kernels
