#pragma once

#include <cstdint>
#include <vector>

#include "iapun/iapun.hpp"

namespace iapun {

enum class BaselineMethod { gda, inexact_appa };

const char* to_string(BaselineMethod method);

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::inexact_appa;
  double eps = 1e-2;
  // GDA step sizes; zero selects 1 / (2 L1) and 1 / (2 ell).
  double eta_x = 0.0;
  double eta_y = 0.0;
  // Proximal weight of inexact APPA; zero selects ell. Any other value must equal ell.
  double gamma = 0.0;
  // Primal gap of each proximal step; zero selects the value that makes the
  // displacement test certify ||grad Phi|| <= eps.
  double prox_tol = 0.0;
  std::int64_t max_steps = 1000000;  // GDA iterations or APPA outer steps
  std::int64_t trace_every = 1000;   // GDA iterations per trace row

  // Fills the zero defaults for a problem and checks positivity.
  BaselineConfig resolved(const SmoothnessSpec& spec) const;
};

struct BaselineResult {
  DenseVector x;
  std::vector<EpochTrace> traces;  // same layout as IAPUN, flags and branch unused
  OracleCounts counts;
  double g_norm = 0.0;             // certified upper bound on ||grad Phi(x)||
  std::int64_t steps = 0;
};

// Alternating GDA: y <- y + eta_y grad_y f(x, y), then x <- x - eta_x grad_x f(x, y).
// Stops once ||grad_x f|| + (ell / mu) ||grad_y f|| <= eps at the current
// pair, which bounds ||grad Phi(x)||. Throws RunStall at the step cap; zero
// steps returns x0.
BaselineResult run_gda(const MinimaxProblem& problem, const DenseVector& x0,
                       const DenseVector& y0, const BaselineConfig& config);

// x_{k+1} = argmin Phi(x) + gamma ||x - x_k||^2 solved to prox_tol, until
// gamma ||x_{k+1} - x_k|| <= eps / 40. Throws RunStall at the step cap.
BaselineResult run_inexact_appa(const MinimaxProblem& problem, const DenseVector& x0,
                                const BaselineConfig& config);

BaselineResult run_baseline(const MinimaxProblem& problem, const DenseVector& x0,
                            const BaselineConfig& config);

}  // namespace iapun
