#include "iapun/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace iapun {

const char* to_string(BaselineMethod method) {
  return method == BaselineMethod::gda ? "gda" : "inexact_appa";
}

BaselineConfig BaselineConfig::resolved(const SmoothnessSpec& spec) const {
  spec.validate();
  BaselineConfig c = *this;
  if (!(c.eps > 0.0)) throw PreconditionViolation("baseline: eps must be positive");
  if (c.max_steps < 0 || c.trace_every <= 0) {
    throw PreconditionViolation("baseline: step cap must be >= 0 and trace_every > 0");
  }
  if (c.eta_x == 0.0) c.eta_x = 1.0 / (2.0 * spec.l1());
  if (c.eta_y == 0.0) c.eta_y = 1.0 / (2.0 * spec.ell);
  if (!(c.eta_x > 0.0) || !(c.eta_y > 0.0)) {
    throw PreconditionViolation("baseline: step sizes must be positive");
  }
  if (c.method == BaselineMethod::gda && (c.eta_x > 1.0 / spec.l1() || c.eta_y > 1.0 / spec.ell)) {
    throw PreconditionViolation("gda: step sizes above 1/L1 or 1/ell");
  }
  if (c.gamma == 0.0) c.gamma = spec.ell;
  if (c.method == BaselineMethod::inexact_appa && c.gamma != spec.ell) {
    throw PreconditionViolation("inexact_appa: gamma must equal ell");
  }
  if (c.prox_tol == 0.0) {
    // ||x' - x*|| <= sqrt(2 tol / sigma) moves the displacement test and
    // grad Phi by at most (L1 + 2 gamma) ||x' - x*|| <= eps / 20.
    const double sigma = 2.0 * c.gamma - spec.ell;
    const double r = c.eps / (20.0 * (spec.l1() + 2.0 * c.gamma));
    c.prox_tol = 0.5 * sigma * r * r;
  }
  if (!(c.prox_tol > 0.0)) throw PreconditionViolation("baseline: prox_tol must be positive");
  return c;
}

BaselineResult run_gda(const MinimaxProblem& problem, const DenseVector& x0,
                       const DenseVector& y0, const BaselineConfig& config) {
  problem.validate();
  const BaselineConfig c = config.resolved(problem.spec);
  if (x0.size() != problem.dim_x || y0.size() != problem.dim_y) {
    throw PreconditionViolation("gda: start point dimension mismatch");
  }
  CountedOracle oracle(problem);
  BaselineResult out;
  out.x = x0;
  out.g_norm = std::numeric_limits<double>::infinity();
  if (c.max_steps == 0) return out;

  const double ratio = problem.spec.ell / problem.spec.mu;
  DenseVector x = x0;
  DenseVector y = y0;
  DenseVector gx(problem.dim_x);
  DenseVector gy(problem.dim_y);
  oracle.grad_y(x, y, gy);
  EpochTrace row;
  for (std::int64_t it = 1; it <= c.max_steps; ++it) {
    axpy(c.eta_y, gy, y);
    oracle.grad_x(x, y, gx);
    oracle.grad_y(x, y, gy);
    const double bound = norm(gx) + ratio * norm(gy);
    const bool done = bound <= c.eps;
    if (!done) {
      axpy(-c.eta_x, gx, x);
      oracle.grad_y(x, y, gy);
    }
    if (done || it % c.trace_every == 0) {
      row.k = static_cast<int>(out.traces.size()) + 1;
      row.t_k = static_cast<int>(it - (out.traces.empty() ? 0 : out.steps));
      row.p = x;
      row.g_norm = bound;
      row.oracle_calls = oracle.counts();
      out.traces.push_back(row);
      out.steps = it;
    }
    if (done) {
      out.x = x;
      out.g_norm = bound;
      out.steps = it;
      out.counts = oracle.counts();
      return out;
    }
  }
  throw RunStall("gda: step cap of " + std::to_string(c.max_steps) + " reached",
                 std::move(out.traces), oracle.counts());
}

BaselineResult run_inexact_appa(const MinimaxProblem& problem, const DenseVector& x0,
                                const BaselineConfig& config) {
  problem.validate();
  const BaselineConfig c = config.resolved(problem.spec);
  if (x0.size() != problem.dim_x) throw PreconditionViolation("inexact_appa: x0 dimension mismatch");
  CountedOracle oracle(problem);
  BaselineResult out;

  // Initial stationarity check with gradient error at most eps / 4.
  const double check_dy = c.prox_tol;
  const double check_big_dy = 0.25 * c.eps;
  InexactEval start = phi_oracle(oracle, x0, check_dy, check_big_dy);
  if (norm(start.g) <= 0.75 * c.eps || c.max_steps == 0) {
    out.x = x0;
    out.g_norm = norm(start.g) + check_big_dy;
    out.counts = oracle.counts();
    return out;
  }

  DenseVector x = x0;
  DenseVector y_warm = start.y;
  const double stop = c.eps / 40.0;
  try {
    for (std::int64_t k = 1; k <= c.max_steps; ++k) {
      SubproblemSpec sub;
      sub.center_p = x;
      sub.center_tilde = x;
      sub.alpha = 0.0;
      sub.gamma = c.gamma;
      CertifiedSolution sol = saddle_prox_solve(oracle, sub, y_warm, c.prox_tol, x);
      y_warm = sol.y;
      const double move = c.gamma * distance(sol.x, x);

      EpochTrace row;
      row.k = static_cast<int>(k);
      row.t_k = 1;
      row.iterates = {x, sol.x};
      row.flags = {move <= stop ? Flag::F5 : Flag::Null};
      row.final_flag = row.flags.back();
      row.p = sol.x;
      row.phi_start = std::numeric_limits<double>::quiet_NaN();
      row.phi_end = std::numeric_limits<double>::quiet_NaN();
      row.descent_est = std::numeric_limits<double>::quiet_NaN();
      // ||grad Phi(x')|| <= 2 gamma ||x' - x|| + eps / 20.
      row.g_norm = 2.0 * move + c.eps / 20.0;
      row.oracle_calls = oracle.counts();
      x = std::move(sol.x);
      out.traces.push_back(row);
      out.steps = k;
      if (move <= stop) {
        out.x = x;
        out.g_norm = row.g_norm;
        out.counts = oracle.counts();
        return out;
      }
    }
  } catch (const SolverStall& e) {
    throw RunStall(std::string("inexact_appa: inner solver stalled: ") + e.what(),
                   std::move(out.traces), oracle.counts());
  }
  throw RunStall("inexact_appa: step cap of " + std::to_string(c.max_steps) + " reached",
                 std::move(out.traces), oracle.counts());
}

BaselineResult run_baseline(const MinimaxProblem& problem, const DenseVector& x0,
                            const BaselineConfig& config) {
  if (config.method == BaselineMethod::gda) {
    return run_gda(problem, x0, DenseVector(problem.dim_y), config);
  }
  return run_inexact_appa(problem, x0, config);
}

}  // namespace iapun
