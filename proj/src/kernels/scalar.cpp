#include "iapun/kernels.hpp"

namespace iapun::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_squares_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void lincomb_scalar(double a, const double* x, double b, const double* y, double* out,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a * x[i] + b * y[i];
}

void upsilon_prime_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = x[i] * x[i];
    out[i] = ((120.0 * t) * (x[i] - 1.0)) / (1.0 + t);
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Backend::scalar,     "scalar",     dot_scalar,
                                 sum_squares_scalar,  squared_distance_scalar,
                                 axpy_scalar,         lincomb_scalar,
                                 upsilon_prime_scalar};
  return table;
}

}  // namespace iapun::kernels
