#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace iapun {

// Owning vector of doubles. Arithmetic goes through the dispatched kernels.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double value = 0.0) : data_(n, value) {}
  DenseVector(std::initializer_list<double> values) : data_(values) {}
  explicit DenseVector(std::vector<double> values) : data_(std::move(values)) {}
  explicit DenseVector(std::span<const double> values) : data_(values.begin(), values.end()) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  operator std::span<const double>() const { return {data_.data(), data_.size()}; }
  operator std::span<double>() { return {data_.data(), data_.size()}; }
  std::span<const double> span() const { return *this; }

  const std::vector<double>& values() const { return data_; }

  DenseVector& operator+=(const DenseVector& other);
  DenseVector& operator-=(const DenseVector& other);
  DenseVector& operator*=(double s);

  bool operator==(const DenseVector& other) const = default;

 private:
  std::vector<double> data_;
};

DenseVector operator+(const DenseVector& a, const DenseVector& b);
DenseVector operator-(const DenseVector& a, const DenseVector& b);
DenseVector operator*(double s, const DenseVector& a);

double dot(std::span<const double> a, std::span<const double> b);
double norm_squared(std::span<const double> a);
double norm(std::span<const double> a);
double norm_inf(std::span<const double> a);
double distance_squared(std::span<const double> a, std::span<const double> b);
double distance(std::span<const double> a, std::span<const double> b);
// y <- y + alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// a * x + b * y
DenseVector lincomb(double a, const DenseVector& x, double b, const DenseVector& y);

bool all_finite(std::span<const double> a);

// Throws EvaluationError naming `what` if any entry is non-finite.
void require_finite(std::span<const double> a, const char* what);

}  // namespace iapun
