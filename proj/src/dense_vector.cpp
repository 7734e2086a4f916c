#include "iapun/dense_vector.hpp"

#include <cmath>
#include <string>

#include "iapun/errors.hpp"
#include "iapun/kernels.hpp"

namespace iapun {
namespace {

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw PreconditionViolation("dimension mismatch: " + std::to_string(a) + " vs " +
                                std::to_string(b));
  }
}

}  // namespace

DenseVector& DenseVector::operator+=(const DenseVector& other) {
  check_same_size(size(), other.size());
  kernels::axpy(1.0, other.data(), data(), size());
  return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& other) {
  check_same_size(size(), other.size());
  kernels::axpy(-1.0, other.data(), data(), size());
  return *this;
}

DenseVector& DenseVector::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseVector operator+(const DenseVector& a, const DenseVector& b) {
  return lincomb(1.0, a, 1.0, b);
}

DenseVector operator-(const DenseVector& a, const DenseVector& b) {
  return lincomb(1.0, a, -1.0, b);
}

DenseVector operator*(double s, const DenseVector& a) {
  DenseVector out = a;
  out *= s;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return kernels::dot(a.data(), b.data(), a.size());
}

double norm_squared(std::span<const double> a) { return kernels::sum_squares(a.data(), a.size()); }

double norm(std::span<const double> a) { return std::sqrt(norm_squared(a)); }

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double distance_squared(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return kernels::squared_distance(a.data(), b.data(), a.size());
}

double distance(std::span<const double> a, std::span<const double> b) {
  return std::sqrt(distance_squared(a, b));
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  kernels::axpy(alpha, x.data(), y.data(), x.size());
}

DenseVector lincomb(double a, const DenseVector& x, double b, const DenseVector& y) {
  check_same_size(x.size(), y.size());
  DenseVector out(x.size());
  kernels::lincomb(a, x.data(), b, y.data(), out.data(), x.size());
  return out;
}

bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_finite(std::span<const double> a, const char* what) {
  if (!all_finite(a)) throw EvaluationError(std::string("non-finite values in ") + what);
}

}  // namespace iapun
