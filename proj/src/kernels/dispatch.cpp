#include <atomic>
#include <string>

#include "evloc/error.hpp"
#include "evloc/kernels.hpp"

namespace evloc::kernels {

#ifndef EVLOC_HAVE_AVX2
const KernelTable* avx2_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(EVLOC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect() { return cpu_has_avx2() ? Backend::avx2 : Backend::scalar; }

std::atomic<Backend>& selected() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

const KernelTable& table_for(Backend backend) {
  if (backend == Backend::avx2) return *avx2_table();
  return scalar_table();
}

const KernelTable& active() { return table_for(selected().load(std::memory_order_relaxed)); }

void check_same(std::size_t a, std::size_t b, const char* what) {
  require(a == b, ErrorKind::ShapeError,
          std::string(what) + ": length " + std::to_string(a) + " vs " + std::to_string(b));
}

}  // namespace

std::string_view to_string(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

bool backend_available(Backend backend) {
  if (backend == Backend::scalar) return true;
  return avx2_table() != nullptr && cpu_has_avx2();
}

Backend active_backend() { return selected().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  require(backend_available(backend), ErrorKind::InvalidParameter,
          "kernel backend " + std::string(to_string(backend)) + " is not available on this machine");
  selected().store(backend, std::memory_order_relaxed);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size(), "axpy");
  active().axpy(alpha, x.data(), y.data(), x.size());
}

void weighted_row_sum(std::span<const double> weights, std::span<const double> rows, std::size_t dim,
                      std::span<double> out) {
  check_same(weights.size() * dim, rows.size(), "weighted_row_sum rows");
  check_same(out.size(), dim, "weighted_row_sum out");
  active().weighted_row_sum(weights.data(), rows.data(), weights.size(), dim, out.data());
}

void row_dots(std::span<const double> rows, std::size_t dim, std::span<const double> v,
              std::span<double> out) {
  check_same(v.size(), dim, "row_dots vector");
  check_same(out.size() * dim, rows.size(), "row_dots rows");
  active().row_dots(rows.data(), out.size(), dim, v.data(), out.data());
}

}  // namespace evloc::kernels
