#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "iapun/dense_vector.hpp"

namespace iapun {

// Smoothness constants of f and of Phi(x) = max_y f(x, y).
struct SmoothnessSpec {
  double ell = 1.0;  // gradient Lipschitz constant of f
  double mu = 1.0;   // strong concavity of f(x, .)
  double l2 = 1.0;   // Hessian Lipschitz constant of Phi

  double kappa_y() const { return ell / mu; }
  double l1() const { return (1.0 + kappa_y()) * ell; }

  // Throws PreconditionViolation unless ell >= mu > 0 and l2 > 0.
  void validate() const;
};

// f(x, y) and its partial gradients. Implementations must be deterministic
// and safe to call concurrently.
class MinimaxObjective {
 public:
  virtual ~MinimaxObjective() = default;
  virtual double value(std::span<const double> x, std::span<const double> y) const = 0;
  virtual void grad_x(std::span<const double> x, std::span<const double> y,
                      std::span<double> out) const = 0;
  virtual void grad_y(std::span<const double> x, std::span<const double> y,
                      std::span<double> out) const = 0;
};

// Closed-form Phi and its gradient, for instances that admit one.
class PrimalReference {
 public:
  virtual ~PrimalReference() = default;
  virtual double phi(std::span<const double> x) const = 0;
  virtual void grad_phi(std::span<const double> x, std::span<double> out) const = 0;
};

struct MinimaxProblem {
  std::string name;
  std::size_t dim_x = 0;
  std::size_t dim_y = 0;
  SmoothnessSpec spec;
  std::shared_ptr<const MinimaxObjective> objective;
  std::shared_ptr<const PrimalReference> reference;  // may be null

  bool has_reference() const { return reference != nullptr; }
  void validate() const;
};

struct OracleCounts {
  std::int64_t f = 0;
  std::int64_t gx = 0;
  std::int64_t gy = 0;

  std::int64_t total() const { return f + gx + gy; }
  std::int64_t gradients() const { return gx + gy; }
  OracleCounts operator-(const OracleCounts& o) const { return {f - o.f, gx - o.gx, gy - o.gy}; }
  OracleCounts& operator+=(const OracleCounts& o) {
    f += o.f;
    gx += o.gx;
    gy += o.gy;
    return *this;
  }
  bool operator==(const OracleCounts&) const = default;
};

// Per-run metered access to a problem. Every evaluation is counted and
// checked for finiteness. Not thread-safe; each run owns one.
class CountedOracle {
 public:
  explicit CountedOracle(const MinimaxProblem& problem);

  const MinimaxProblem& problem() const { return *problem_; }
  const SmoothnessSpec& spec() const { return problem_->spec; }
  std::size_t dim_x() const { return problem_->dim_x; }
  std::size_t dim_y() const { return problem_->dim_y; }

  double value(std::span<const double> x, std::span<const double> y);
  void grad_x(std::span<const double> x, std::span<const double> y, std::span<double> out);
  void grad_y(std::span<const double> x, std::span<const double> y, std::span<double> out);

  const OracleCounts& counts() const { return counts_; }

 private:
  const MinimaxProblem* problem_;
  OracleCounts counts_;
};

// Approximate (Phi(x), grad Phi(x)) with its accuracy contract.
struct InexactEval {
  double phi = 0.0;
  DenseVector g;
  double delta_y = 0.0;      // |phi - Phi(x)| <= delta_y
  double big_delta_y = 0.0;  // ||g - grad Phi(x)|| <= big_delta_y
  std::int64_t inner_iters = 0;
  DenseVector y;             // approximate maximizer, for warm starts
};

// Inner-accuracy target in function value used by phi_oracle.
double phi_oracle_target(const SmoothnessSpec& spec, double delta_y, double big_delta_y);

// Danskin-based evaluation: y' maximizes f(x, .) to the certified target,
// then phi = f(x, y') and g = grad_x f(x, y'). y_warm seeds the inner ascent
// (zero when empty).
InexactEval phi_oracle(CountedOracle& oracle, std::span<const double> x, double delta_y,
                       double big_delta_y, std::span<const double> y_warm = {});

InexactEval phi_oracle(const MinimaxProblem& problem, std::span<const double> x, double delta_y,
                       double big_delta_y);

using ScalarField = std::function<double(std::span<const double>)>;

// Central differences: entry i is (F(x + h e_i) - F(x - h e_i)) / (2h). Requires h > 0.
DenseVector finite_diff_grad(const ScalarField& f, std::span<const double> x, double h);

// Same with h = eps^(1/3) * max(1, ||x||_inf).
DenseVector finite_diff_grad(const ScalarField& f, std::span<const double> x);

double default_fd_step(std::span<const double> x);

}  // namespace iapun
