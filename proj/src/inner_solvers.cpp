#include "iapun/inner_solvers.hpp"

#include <cmath>
#include <string>

#include "iapun/errors.hpp"

namespace iapun {

void SubproblemSpec::validate(const SmoothnessSpec& spec, std::size_t dim_x) const {
  if (center_p.size() != dim_x || center_tilde.size() != dim_x) {
    throw PreconditionViolation("subproblem centers have the wrong dimension");
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw PreconditionViolation("alpha must be >= 0");
  if (!(gamma >= spec.ell) || !std::isfinite(gamma)) {
    throw PreconditionViolation("gamma must be >= ell");
  }
  if (ball) {
    if (ball->center.size() != dim_x) throw PreconditionViolation("ball center dimension");
    if (!(ball->radius > 0.0)) throw PreconditionViolation("ball radius must be positive");
  }
}

void project_onto_ball(const Ball& ball, std::span<double> x) {
  const double r = distance(x, ball.center);
  if (r <= ball.radius) return;
  const double s = ball.radius / r;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = ball.center[i] + s * (x[i] - ball.center[i]);
}

std::int64_t agd_iteration_cap(double kappa, double initial_gap_bound, double target) {
  // Accelerated rate (1 - 1/sqrt(kappa))^k on the potential, converted to a
  // bound on the gradient at the extrapolated point (factor 32 kappa^2), with
  // a 10x allowance.
  const double ratio = std::max(32.0 * kappa * kappa * initial_gap_bound / target, std::exp(1.0));
  const double bound = std::ceil(std::sqrt(kappa) * std::log(ratio));
  return static_cast<std::int64_t>(10.0 * bound) + 10;
}

CertifiedSolution agd_max(CountedOracle& oracle, std::span<const double> x_fixed,
                          std::span<const double> y0, double target) {
  if (!(target > 0.0)) throw PreconditionViolation("agd_max needs target > 0");
  const SmoothnessSpec& spec = oracle.spec();
  const std::size_t m = oracle.dim_y();
  const OracleCounts before = oracle.counts();
  const double kappa = spec.kappa_y();
  const double beta = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  const double step = 1.0 / spec.ell;
  const double threshold = 2.0 * spec.mu * target * 0.25;

  DenseVector y = y0.empty() ? DenseVector(m) : DenseVector(y0);
  DenseVector z = y;
  DenseVector y_next(m);
  DenseVector g(m);
  oracle.grad_y(x_fixed, z, g);
  double g2 = norm_squared(g);
  const std::int64_t cap = agd_iteration_cap(kappa, g2 / (2.0 * spec.mu), target);

  std::int64_t iter = 0;
  while (g2 > threshold) {
    if (iter >= cap) {
      throw SolverStall("agd_max exceeded " + std::to_string(cap) + " iterations",
                        g2 / (2.0 * spec.mu), iter);
    }
    for (std::size_t i = 0; i < m; ++i) y_next[i] = z[i] + step * g[i];
    for (std::size_t i = 0; i < m; ++i) z[i] = y_next[i] + beta * (y_next[i] - y[i]);
    std::swap(y, y_next);
    oracle.grad_y(x_fixed, z, g);
    g2 = norm_squared(g);
    ++iter;
  }

  CertifiedSolution out;
  out.x = z;
  out.y = z;
  out.suboptimality_bound = g2 / (2.0 * spec.mu);
  out.iterations = iter;
  out.oracle_cost = oracle.counts() - before;
  return out;
}

CertifiedSolution agd_max(const MinimaxProblem& problem, std::span<const double> x_fixed,
                          std::span<const double> y0, double target) {
  CountedOracle oracle(problem);
  return agd_max(oracle, x_fixed, y0, target);
}

namespace {

struct InnerResult {
  double bound;
  std::int64_t iterations;
};

// Projected AGD on x -> f(x, z) + alpha ||x - p||^2 + gamma ||x - x~||^2.
// On entry x is the warm start; on exit it holds the certified point.
InnerResult minimize_x(CountedOracle& oracle, const SubproblemSpec& spec, std::span<const double> z,
                       double sigma, double smooth, double tol, DenseVector& x) {
  const std::size_t n = x.size();
  const double kappa = smooth / sigma;
  const double beta = (std::sqrt(kappa) - 1.0) / (std::sqrt(kappa) + 1.0);
  const double two_a = 2.0 * spec.alpha;
  const double two_g = 2.0 * spec.gamma;

  DenseVector q = x;
  DenseVector prev = x;
  DenseVector grad(n);
  DenseVector next(n);
  std::int64_t cap = -1;
  std::int64_t iter = 0;
  for (;;) {
    oracle.grad_x(q, z, grad);
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] += two_a * (q[i] - spec.center_p[i]) + two_g * (q[i] - spec.center_tilde[i]);
      next[i] = q[i] - grad[i] / smooth;
    }
    if (spec.ball) project_onto_ball(*spec.ball, next);
    // Gradient mapping G = L (q - next); gap of next is at most ||G||^2 / (2 sigma).
    const double gm2 = smooth * smooth * distance_squared(q, next);
    const double bound = gm2 / (2.0 * sigma);
    if (cap < 0) cap = agd_iteration_cap(kappa, bound + 1e-300, tol);
    if (bound <= tol) {
      x = next;
      return {bound, iter};
    }
    if (iter >= cap) {
      throw SolverStall("inner x-minimization exceeded " + std::to_string(cap) + " iterations",
                        bound, iter);
    }
    for (std::size_t i = 0; i < n; ++i) q[i] = next[i] + beta * (next[i] - prev[i]);
    std::swap(prev, next);
    ++iter;
  }
}

}  // namespace

CertifiedSolution saddle_prox_solve(CountedOracle& oracle, const SubproblemSpec& spec,
                                    std::span<const double> y_warm, double delta_x,
                                    std::span<const double> x_warm) {
  const SmoothnessSpec& s = oracle.spec();
  spec.validate(s, oracle.dim_x());
  if (!(delta_x > 0.0)) throw PreconditionViolation("saddle_prox_solve needs delta_x > 0");
  const std::size_t m = oracle.dim_y();
  const OracleCounts before = oracle.counts();

  const double sigma = 2.0 * spec.alpha + 2.0 * spec.gamma - s.ell;
  const double smooth = 2.0 * spec.alpha + 2.0 * spec.gamma + s.ell;
  const double l_psi = s.ell + s.ell * s.ell / sigma;
  const double kappa_psi = l_psi / s.mu;
  const double beta = (std::sqrt(kappa_psi) - 1.0) / (std::sqrt(kappa_psi) + 1.0);
  const double half = 0.5 * delta_x;
  // Inner accuracy small enough that the inexact dual gradient cannot mask
  // the dual certificate.
  const double inner_tol = std::min(half, sigma * s.mu * delta_x / (200.0 * s.ell * s.ell));

  DenseVector x = x_warm.empty() ? spec.center_tilde : DenseVector(x_warm);
  if (spec.ball) project_onto_ball(*spec.ball, x);
  DenseVector z = y_warm.empty() ? DenseVector(m) : DenseVector(y_warm);
  DenseVector y_prev = z;
  DenseVector y_next(m);
  DenseVector gy(m);

  // While the dual gradient is large the inner solve only needs to keep the
  // gradient error at a tenth of it; the final inner_tol is enforced before
  // the certificate is issued.
  const double loose_factor = sigma * s.mu / (100.0 * s.ell * s.ell);
  oracle.grad_y(x, z, gy);
  double tol = std::max(inner_tol, loose_factor * norm_squared(gy) / (2.0 * s.mu));
  std::int64_t cap = -1;
  std::int64_t iter = 0;
  for (;;) {
    InnerResult inner = minimize_x(oracle, spec, z, sigma, smooth, tol, x);
    oracle.grad_y(x, z, gy);
    double dual_bound = norm_squared(gy) / (2.0 * s.mu);
    if (dual_bound <= half && inner.bound > inner_tol) {
      inner = minimize_x(oracle, spec, z, sigma, smooth, inner_tol, x);
      oracle.grad_y(x, z, gy);
      dual_bound = norm_squared(gy) / (2.0 * s.mu);
    }
    tol = std::max(inner_tol, loose_factor * dual_bound);
    if (cap < 0) cap = agd_iteration_cap(kappa_psi, dual_bound + 1e-300, half);
    if (dual_bound <= half && inner.bound <= inner_tol) {
      CertifiedSolution out;
      out.x = x;
      out.y = z;
      out.suboptimality_bound = dual_bound + inner.bound;
      out.iterations = iter;
      out.oracle_cost = oracle.counts() - before;
      return out;
    }
    if (iter >= cap) {
      throw SolverStall("saddle_prox_solve exceeded " + std::to_string(cap) + " iterations",
                        dual_bound, iter);
    }
    for (std::size_t i = 0; i < m; ++i) y_next[i] = z[i] + gy[i] / l_psi;
    for (std::size_t i = 0; i < m; ++i) z[i] = y_next[i] + beta * (y_next[i] - y_prev[i]);
    std::swap(y_prev, y_next);
    ++iter;
  }
}

CertifiedSolution saddle_prox_solve(const MinimaxProblem& problem, const SubproblemSpec& spec,
                                    std::span<const double> y_warm, double delta_x) {
  CountedOracle oracle(problem);
  return saddle_prox_solve(oracle, spec, y_warm, delta_x);
}

}  // namespace iapun
