#include "iapun/problem.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "iapun/errors.hpp"
#include "iapun/inner_solvers.hpp"

namespace iapun {

void SmoothnessSpec::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw PreconditionViolation("mu must be positive");
  if (!(ell >= mu) || !std::isfinite(ell)) throw PreconditionViolation("ell must be >= mu");
  if (!(l2 > 0.0) || !std::isfinite(l2)) throw PreconditionViolation("l2 must be positive");
}

void MinimaxProblem::validate() const {
  spec.validate();
  if (!objective) throw PreconditionViolation("problem '" + name + "' has no objective");
  if (dim_x == 0) throw PreconditionViolation("problem '" + name + "' has dim_x = 0");
}

CountedOracle::CountedOracle(const MinimaxProblem& problem) : problem_(&problem) {
  problem.validate();
}

namespace {

void check_dims(std::span<const double> x, std::span<const double> y, const MinimaxProblem& p) {
  if (x.size() != p.dim_x || y.size() != p.dim_y) {
    throw PreconditionViolation("oracle dimension mismatch for '" + p.name + "'");
  }
}

}  // namespace

double CountedOracle::value(std::span<const double> x, std::span<const double> y) {
  check_dims(x, y, *problem_);
  ++counts_.f;
  const double v = problem_->objective->value(x, y);
  if (!std::isfinite(v)) throw EvaluationError("non-finite f value in '" + problem_->name + "'");
  return v;
}

void CountedOracle::grad_x(std::span<const double> x, std::span<const double> y,
                           std::span<double> out) {
  check_dims(x, y, *problem_);
  ++counts_.gx;
  problem_->objective->grad_x(x, y, out);
  require_finite(out, "grad_x f");
}

void CountedOracle::grad_y(std::span<const double> x, std::span<const double> y,
                           std::span<double> out) {
  check_dims(x, y, *problem_);
  ++counts_.gy;
  problem_->objective->grad_y(x, y, out);
  require_finite(out, "grad_y f");
}

double phi_oracle_target(const SmoothnessSpec& spec, double delta_y, double big_delta_y) {
  return std::min(delta_y, spec.mu * big_delta_y * big_delta_y / (2.0 * spec.ell * spec.ell));
}

InexactEval phi_oracle(CountedOracle& oracle, std::span<const double> x, double delta_y,
                       double big_delta_y, std::span<const double> y_warm) {
  if (!(delta_y > 0.0) || !(big_delta_y > 0.0)) {
    throw PreconditionViolation("phi_oracle needs positive accuracies");
  }
  require_finite(x, "phi_oracle input");
  const OracleCounts before = oracle.counts();
  const double target = phi_oracle_target(oracle.spec(), delta_y, big_delta_y);

  DenseVector y0(oracle.dim_y());
  if (!y_warm.empty()) y0 = DenseVector(y_warm);
  CertifiedSolution inner = agd_max(oracle, x, y0, target);

  InexactEval out;
  out.phi = oracle.value(x, inner.x);
  out.g = DenseVector(oracle.dim_x());
  oracle.grad_x(x, inner.x, out.g);
  out.delta_y = delta_y;
  out.big_delta_y = big_delta_y;
  out.y = std::move(inner.x);
  out.inner_iters = (oracle.counts() - before).total();
  return out;
}

InexactEval phi_oracle(const MinimaxProblem& problem, std::span<const double> x, double delta_y,
                       double big_delta_y) {
  CountedOracle oracle(problem);
  return phi_oracle(oracle, x, delta_y, big_delta_y);
}

double default_fd_step(std::span<const double> x) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * std::max(1.0, norm_inf(x));
}

DenseVector finite_diff_grad(const ScalarField& f, std::span<const double> x, double h) {
  if (!(h > 0.0)) throw PreconditionViolation("finite_diff_grad needs h > 0");
  DenseVector probe(x);
  DenseVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = probe[i];
    probe[i] = xi + h;
    const double fp = f(probe);
    probe[i] = xi - h;
    const double fm = f(probe);
    probe[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw EvaluationError("non-finite value in finite_diff_grad at coordinate " +
                            std::to_string(i));
    }
    out[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

DenseVector finite_diff_grad(const ScalarField& f, std::span<const double> x) {
  return finite_diff_grad(f, x, default_fd_step(x));
}

}  // namespace iapun
