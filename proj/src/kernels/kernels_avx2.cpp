// AVX2/FMA kernels, 4 doubles per lane group. Compiled with -mavx2 -mfma and
// only reached after a CPUID check in dispatch.cpp.

#include <immintrin.h>

#include "evloc/kernels.hpp"

namespace evloc::kernels {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void weighted_row_sum_avx2(const double* w, const double* rows, std::size_t n_rows,
                           std::size_t dim, double* out) {
  std::size_t d = 0;
  for (; d + 4 <= dim; d += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < n_rows; ++j) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(w[j]), _mm256_loadu_pd(rows + j * dim + d), acc);
    }
    _mm256_storeu_pd(out + d, acc);
  }
  for (; d < dim; ++d) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n_rows; ++j) acc += w[j] * rows[j * dim + d];
    out[d] = acc;
  }
}

void row_dots_avx2(const double* rows, std::size_t n_rows, std::size_t dim, const double* v,
                   double* out) {
  for (std::size_t j = 0; j < n_rows; ++j) out[j] = dot_avx2(rows + j * dim, v, dim);
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{dot_avx2, axpy_avx2, weighted_row_sum_avx2, row_dots_avx2};
  return &table;
}

}  // namespace evloc::kernels
