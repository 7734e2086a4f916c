#pragma once

// Dense vector kernels used by every oracle and solver inner loop.
//
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The variant is chosen once at first use from the CPU feature set;
// IAPUN_KERNELS=scalar|avx2 in the environment overrides the choice.
//
// Elementwise kernels produce bit-identical results in every backend.
// Reductions (dot, sum_squares, squared_distance) use a different summation
// order in the AVX2 backend and agree with the scalar reference to rounding.

#include <cstddef>
#include <string_view>

namespace iapun::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
  Backend backend;
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_squares)(const double* a, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y <- y + alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out <- a * x + b * y
  void (*lincomb)(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n);
  // out <- 120 x^2 (x - 1) / (1 + x^2), elementwise
  void (*upsilon_prime)(const double* x, double* out, std::size_t n);
};

const KernelTable& scalar_table();

// Null when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

// The dispatched table. Stable for the lifetime of the process unless
// force_backend() is called.
const KernelTable& active();

// Test hook: switch the dispatched backend. Returns false if unavailable.
bool force_backend(Backend backend);

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline double sum_squares(const double* a, std::size_t n) { return active().sum_squares(a, n); }
inline double squared_distance(const double* a, const double* b, std::size_t n) {
  return active().squared_distance(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void lincomb(double a, const double* x, double b, const double* y, double* out,
                    std::size_t n) {
  active().lincomb(a, x, b, y, out, n);
}
inline void upsilon_prime(const double* x, double* out, std::size_t n) {
  active().upsilon_prime(x, out, n);
}

}  // namespace iapun::kernels
