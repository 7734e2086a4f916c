#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "iapun/errors.hpp"
#include "iapun/inner_solvers.hpp"
#include "iapun/params.hpp"
#include "iapun/problem.hpp"

namespace iapun {

enum class Flag { Null, F1, F2, F3, F4, F5 };

const char* to_string(Flag flag);

struct FlagOutcome {
  Flag flag = Flag::Null;
  std::optional<DenseVector> w;  // absent for F1
};

struct NcPair {
  DenseVector u;
  DenseVector v;
  std::size_t t = 0;    // v = x_{k,t}
  bool u_is_w = false;  // u = w instead of x_{k,t-1}
};

// How the epoch produced p_k.
enum class Branch { Prox, BestCandidate, NcExploit };

const char* to_string(Branch branch);

struct EpochTrace {
  int k = 0;
  std::vector<DenseVector> iterates;  // x_{k,0}, ..., x_{k,T_k}
  std::vector<Flag> flags;            // verdict for t = 1..T_k
  std::vector<double> e_values;       // E_k per t, NaN where not computed
  int t_k = 0;
  Flag final_flag = Flag::Null;
  bool recomputed = false;            // x_{k,T_k} came from the ball-constrained solve
  std::optional<DenseVector> w;
  Branch branch = Branch::Prox;
  std::optional<NcPair> nc_pair;
  DenseVector p;                      // p_k
  double phi_start = 0.0;             // approximate Phi(x_{k,0})
  double phi_end = 0.0;               // approximate Phi(p_k)
  double descent_est = 0.0;           // phi_end - phi_start
  double g_norm = 0.0;                // ||g_{p_k}||
  OracleCounts oracle_calls;          // cumulative at the end of the epoch
};

struct RunCaps {
  int max_epochs = 10000;
  int max_inner = 100000;  // absolute ceiling on T_k
};

struct RunResult {
  DenseVector p;
  std::vector<EpochTrace> traces;
  OracleCounts counts;
  double g_norm = 0.0;  // ||g_p|| of the returned point
  double phi0 = 0.0;    // approximate Phi(p0)
};

// A run exceeded an epoch or iteration cap. Carries every completed trace
// plus the partial one.
class RunStall : public Error {
 public:
  RunStall(const std::string& what, std::vector<EpochTrace> traces, OracleCounts counts)
      : Error(what), traces_(std::move(traces)), counts_(counts) {}
  const std::vector<EpochTrace>& traces() const { return traces_; }
  const OracleCounts& counts() const { return counts_; }

 private:
  std::vector<EpochTrace> traces_;
  OracleCounts counts_;
};

// Dual and primal warm starts carried across solves within a run.
struct WarmStarts {
  DenseVector y_phi;
  DenseVector y_saddle;
};

// State of one epoch: the majorized objective Phi(x) + alpha ||x - p||^2 and
// its cached inexact evaluations, keyed by the exact bits of x.
class EpochContext {
 public:
  EpochContext(CountedOracle& oracle, const IapunParams& params, DenseVector p_prev,
               WarmStarts& warm);

  const IapunParams& params() const { return params_; }
  const DenseVector& center() const { return p_; }
  CountedOracle& oracle() { return oracle_; }

  // Cached phi_oracle(x) with the run's (delta_y, Delta_y).
  const InexactEval& eval(const DenseVector& x);
  void seed(const DenseVector& x, InexactEval e);
  double phi_hat(const DenseVector& x);
  DenseVector g_hat(const DenseVector& x);

  // delta_x-solve of min Phi_hat(x) + gamma ||x - center_tilde||^2, optionally on a ball.
  CertifiedSolution prox_solve(const DenseVector& center_tilde, std::optional<Ball> ball,
                               const DenseVector& x_warm);

  // x_{k,0..t} and the extrapolated centers x~_{k,0..t}.
  std::vector<DenseVector> iterates;
  std::vector<DenseVector> tildes;

 private:
  CountedOracle& oracle_;
  const IapunParams& params_;
  DenseVector p_;
  WarmStarts& warm_;
  std::map<std::string, InexactEval> cache_;
};

struct CertifyResult {
  FlagOutcome outcome;
  bool recomputed = false;
  double e_value;  // E_k, NaN unless the w-solve ran
};

// Progress check at step t >= 1 on ctx.iterates[t]. May replace
// ctx.iterates[t] by the ball-constrained recompute.
CertifyResult certify(EpochContext& ctx, int t);

struct ExploitResult {
  DenseVector p;
  NcPair pair;
  DenseVector x1;
  DenseVector x2;
};

// Scans consecutive pairs, then (w, x_t), for a strong-convexity violation
// and steps alpha / L2 along it. Throws InvariantViolation if no pair qualifies.
ExploitResult exploit_ncvx(EpochContext& ctx, const std::optional<DenseVector>& w);

RunResult run(const MinimaxProblem& problem, const DenseVector& p0, const IapunParams& params,
              const RunCaps& caps = {});

}  // namespace iapun
