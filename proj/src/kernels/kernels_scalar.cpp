// Scalar reference kernels. These define the semantics; the SIMD variants are
// tested against them.

#include "evloc/kernels.hpp"

namespace evloc::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void weighted_row_sum_scalar(const double* w, const double* rows, std::size_t n_rows,
                             std::size_t dim, double* out) {
  for (std::size_t d = 0; d < dim; ++d) out[d] = 0.0;
  for (std::size_t j = 0; j < n_rows; ++j) {
    const double wj = w[j];
    const double* r = rows + j * dim;
    for (std::size_t d = 0; d < dim; ++d) out[d] += wj * r[d];
  }
}

void row_dots_scalar(const double* rows, std::size_t n_rows, std::size_t dim, const double* v,
                     double* out) {
  for (std::size_t j = 0; j < n_rows; ++j) out[j] = dot_scalar(rows + j * dim, v, dim);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{dot_scalar, axpy_scalar, weighted_row_sum_scalar, row_dots_scalar};
  return table;
}

}  // namespace evloc::kernels
