#include "platedpg/kernels.hpp"

#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
#define PLATEDPG_HAVE_AVX2 1
#include <immintrin.h>
#endif

namespace platedpg::kernels {

#ifdef PLATEDPG_HAVE_AVX2
namespace {

#define PLATEDPG_AVX2 __attribute__((target("avx2,fma")))

PLATEDPG_AVX2 double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

PLATEDPG_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

PLATEDPG_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

PLATEDPG_AVX2 void sym_rank1(double w, const double* v, std::size_t n, double* g, std::size_t ldg) {
  for (std::size_t i = 0; i < n; ++i) axpy(w * v[i], v, g + i * ldg, n);
}

PLATEDPG_AVX2 void trsm_lower(const double* l, std::size_t n, double* x, std::size_t ncols) {
  for (std::size_t i = 0; i < n; ++i) {
    double* xi = x + i * ncols;
    for (std::size_t k = 0; k < i; ++k) axpy(-l[i * n + k], x + k * ncols, xi, ncols);
    const double inv = 1.0 / l[i * n + i];
    const __m256d vinv = _mm256_set1_pd(inv);
    std::size_t j = 0;
    for (; j + 4 <= ncols; j += 4) _mm256_storeu_pd(xi + j, _mm256_mul_pd(_mm256_loadu_pd(xi + j), vinv));
    for (; j < ncols; ++j) xi[j] *= inv;
  }
}

PLATEDPG_AVX2 void gram_tn(const double* x, std::size_t rows, std::size_t cols, double* c) {
  for (std::size_t j = 0; j < cols * cols; ++j) c[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) sym_rank1(1.0, x + i * cols, cols, c, cols);
}

PLATEDPG_AVX2 void gemv_t(const double* x, std::size_t rows, std::size_t cols, const double* v, double* y) {
  for (std::size_t j = 0; j < cols; ++j) y[j] = 0.0;
  for (std::size_t i = 0; i < rows; ++i) axpy(v[i], x + i * cols, y, cols);
}

#undef PLATEDPG_AVX2

constexpr Table kAvx2{Isa::avx2, dot, axpy, sym_rank1, trsm_lower, gram_tn, gemv_t};

}  // namespace

const Table* detail::avx2_table() { return &kAvx2; }

#else

const Table* detail::avx2_table() { return nullptr; }

#endif

}  // namespace platedpg::kernels
