// Data-parallel inner loops used by pooling, cosine similarity and their
// backward passes.
//
// Each routine has a scalar reference implementation and, on x86-64, an
// AVX2/FMA variant. The variant is chosen once at runtime from CPUID and can
// be overridden with set_backend() (tests use this to compare the two).
// Reductions run in a fixed order within a backend, so results are
// reproducible run to run; scalar and AVX2 agree to rounding only.

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

namespace evloc::kernels {

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend backend);

/// True when the backend was compiled in and the CPU supports it.
bool backend_available(Backend backend);
Backend active_backend();
/// Selects a backend for subsequent calls. Throws InvalidParameter if unavailable.
void set_backend(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// out = sum_j weights[j] * rows[j], rows row-major with `dim` columns.
void weighted_row_sum(std::span<const double> weights, std::span<const double> rows, std::size_t dim,
                      std::span<double> out);

/// out[j] = dot(rows[j], v)
void row_dots(std::span<const double> rows, std::size_t dim, std::span<const double> v,
              std::span<double> out);

// Raw per-backend entry points, exposed for equivalence testing.
struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*weighted_row_sum)(const double* w, const double* rows, std::size_t n_rows, std::size_t dim,
                           double* out);
  void (*row_dots)(const double* rows, std::size_t n_rows, std::size_t dim, const double* v,
                   double* out);
};

const KernelTable& scalar_table();
/// nullptr when the AVX2 variant was not compiled in.
const KernelTable* avx2_table();

}  // namespace evloc::kernels
