#pragma once

// Dense inner-loop kernels used by element assembly and condensation.
//
// Every kernel has a portable scalar reference implementation. On x86-64 an
// AVX2/FMA variant is compiled with per-function target attributes and picked
// at runtime when the CPU supports it, so the binary stays runnable on older
// hardware. Set PLATEDPG_ISA=scalar to force the reference path.

#include <cstddef>
#include <string_view>

namespace platedpg::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct Table {
  Isa isa;
  // sum_i x[i] * y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // G += w * v v^T, G is n x n row-major with leading dimension ldg.
  void (*sym_rank1)(double w, const double* v, std::size_t n, double* g, std::size_t ldg);
  // X := L^{-1} X for lower-triangular n x n L (row-major, nonzero diagonal)
  // and n x ncols row-major X.
  void (*trsm_lower)(const double* l, std::size_t n, double* x, std::size_t ncols);
  // C := X^T X for rows x cols row-major X; C is cols x cols row-major.
  void (*gram_tn)(const double* x, std::size_t rows, std::size_t cols, double* c);
  // y := X^T v for rows x cols row-major X.
  void (*gemv_t)(const double* x, std::size_t rows, std::size_t cols, const double* v, double* y);
};

bool supported(Isa isa);

// Kernel table for a specific instruction set. Throws ConfigurationError if
// the ISA is not available on this machine or build.
const Table& table(Isa isa);

// Currently selected table. The first call picks the best supported ISA
// unless the PLATEDPG_ISA environment variable says otherwise.
const Table& active();

// Overrides the runtime selection (thread-safe; intended for tests and
// benchmarking).
void select(Isa isa);

namespace detail {
const Table& scalar_table();
const Table* avx2_table();  // nullptr when not compiled in
}  // namespace detail

}  // namespace platedpg::kernels
