#include "iapun/iapun.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

namespace iapun {

const char* to_string(Flag flag) {
  switch (flag) {
    case Flag::Null: return "null";
    case Flag::F1: return "1";
    case Flag::F2: return "2";
    case Flag::F3: return "3";
    case Flag::F4: return "4";
    case Flag::F5: return "5";
  }
  return "?";
}

const char* to_string(Branch branch) {
  switch (branch) {
    case Branch::Prox: return "prox";
    case Branch::BestCandidate: return "best_candidate";
    case Branch::NcExploit: return "nc_exploit";
  }
  return "?";
}

namespace {

std::string bit_key(const DenseVector& x) {
  std::string key(x.size() * sizeof(double), '\0');
  std::memcpy(key.data(), x.data(), key.size());
  return key;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

EpochContext::EpochContext(CountedOracle& oracle, const IapunParams& params, DenseVector p_prev,
                           WarmStarts& warm)
    : oracle_(oracle), params_(params), p_(std::move(p_prev)), warm_(warm) {}

const InexactEval& EpochContext::eval(const DenseVector& x) {
  std::string key = bit_key(x);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  InexactEval e = phi_oracle(oracle_, x, params_.delta_y, params_.big_delta_y, warm_.y_phi);
  warm_.y_phi = e.y;
  return cache_.emplace(std::move(key), std::move(e)).first->second;
}

void EpochContext::seed(const DenseVector& x, InexactEval e) {
  cache_.insert_or_assign(bit_key(x), std::move(e));
}

double EpochContext::phi_hat(const DenseVector& x) {
  return eval(x).phi + params_.alpha * distance_squared(x, p_);
}

DenseVector EpochContext::g_hat(const DenseVector& x) {
  DenseVector g = eval(x).g;
  const double two_a = 2.0 * params_.alpha;
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += two_a * (x[i] - p_[i]);
  return g;
}

CertifiedSolution EpochContext::prox_solve(const DenseVector& center_tilde,
                                           std::optional<Ball> ball, const DenseVector& x_warm) {
  SubproblemSpec spec;
  spec.center_p = p_;
  spec.center_tilde = center_tilde;
  spec.alpha = params_.alpha;
  spec.gamma = params_.gamma;
  spec.ball = std::move(ball);
  CertifiedSolution sol = saddle_prox_solve(oracle_, spec, warm_.y_saddle, params_.delta_x, x_warm);
  warm_.y_saddle = sol.y;
  return sol;
}

CertifyResult certify(EpochContext& ctx, int t) {
  if (t < 1 || static_cast<std::size_t>(t) >= ctx.iterates.size()) {
    throw PreconditionViolation("certify needs 1 <= t <= number of iterates");
  }
  const IapunParams& prm = ctx.params();
  const DenseVector& x0 = ctx.iterates[0];
  const double base = ctx.phi_hat(x0);
  const double increase_cap = base + prm.chi + 2.0 * prm.delta_y;
  CertifyResult out;
  out.e_value = kNaN;

  if (ctx.phi_hat(ctx.iterates[t]) > increase_cap) {
    const double phi0 = ctx.eval(x0).phi;
    double best = std::numeric_limits<double>::infinity();
    for (int s = 1; s <= t - 1; ++s) best = std::min(best, ctx.eval(ctx.iterates[s]).phi);
    if (best <= phi0 - prm.candidate_threshold()) {
      out.outcome = {Flag::F1, std::nullopt};
      return out;
    }
    if (distance(x0, ctx.iterates[t]) <= prm.ball_radius()) {
      out.outcome = {Flag::F2, x0};
      return out;
    }
    CertifiedSolution sol =
        ctx.prox_solve(ctx.tildes[t - 1], Ball{x0, prm.ball_radius()}, ctx.iterates[t]);
    ctx.iterates[t] = std::move(sol.x);
    out.recomputed = true;
    if (ctx.phi_hat(ctx.iterates[t]) > increase_cap) {
      out.outcome = {Flag::F2, x0};
    } else {
      out.outcome = {Flag::F3, ctx.iterates[t]};
    }
    return out;
  }

  const DenseVector& xt = ctx.iterates[t];
  // w moves from x_t about as far as x_t moved from its own center.
  CertifiedSolution sol =
      ctx.prox_solve(xt, std::nullopt, lincomb(2.0, xt, -1.0, ctx.tildes[t - 1]));
  DenseVector w = std::move(sol.x);
  const double e_k = base - ctx.phi_hat(w) + 0.25 * prm.alpha * distance_squared(w, x0);
  out.e_value = e_k;
  const double dist2 = distance_squared(w, xt);
  const double contraction = std::pow(1.0 - 1.0 / (6.0 * std::sqrt(prm.kappa_x)), t);
  if (prm.gamma * dist2 > contraction * e_k + prm.chi + prm.delta_x + 2.0 * prm.delta_y) {
    out.outcome = {Flag::F4, std::move(w)};
  } else if (prm.gamma * std::sqrt(dist2) <= prm.eps / 40.0) {
    out.outcome = {Flag::F5, std::move(w)};
  } else {
    out.outcome = {Flag::Null, std::move(w)};
  }
  return out;
}

namespace {

// zeta(x, x') < -2 delta_y - Delta_y ||x - x'||
bool qualifies(EpochContext& ctx, const DenseVector& x, const DenseVector& xp) {
  const IapunParams& prm = ctx.params();
  const DenseVector diff = x - xp;
  const double dist2 = norm_squared(diff);
  const double zeta = ctx.phi_hat(x) - ctx.phi_hat(xp) - dot(ctx.g_hat(xp), diff) -
                      0.5 * prm.alpha * dist2;
  return zeta < -2.0 * prm.delta_y - prm.big_delta_y * std::sqrt(dist2);
}

}  // namespace

ExploitResult exploit_ncvx(EpochContext& ctx, const std::optional<DenseVector>& w) {
  const std::size_t t_k = ctx.iterates.size() - 1;
  std::optional<NcPair> pair;
  for (std::size_t t = 1; t <= t_k && !pair; ++t) {
    if (qualifies(ctx, ctx.iterates[t - 1], ctx.iterates[t])) {
      pair = NcPair{ctx.iterates[t - 1], ctx.iterates[t], t, false};
    } else if (w && qualifies(ctx, *w, ctx.iterates[t])) {
      pair = NcPair{*w, ctx.iterates[t], t, true};
    }
  }
  if (!pair) throw InvariantViolation("exploit_ncvx found no negative-curvature pair");

  const DenseVector diff = pair->u - pair->v;
  const double step = ctx.params().eta() / norm(diff);
  ExploitResult out;
  out.x1 = lincomb(1.0, pair->u, step, diff);
  out.x2 = lincomb(1.0, pair->u, -step, diff);
  out.p = ctx.eval(out.x2).phi < ctx.eval(out.x1).phi ? out.x2 : out.x1;
  out.pair = std::move(*pair);
  return out;
}

RunResult run(const MinimaxProblem& problem, const DenseVector& p0, const IapunParams& params,
              const RunCaps& caps) {
  if (p0.size() != problem.dim_x) throw PreconditionViolation("p0 has the wrong dimension");
  CountedOracle oracle(problem);
  WarmStarts warm;
  RunResult result;
  std::vector<EpochTrace> traces;

  InexactEval start = phi_oracle(oracle, p0, params.delta_y, params.big_delta_y);
  warm.y_phi = start.y;
  result.phi0 = start.phi;
  check_precision_floor(params, start.phi);

  DenseVector p = p0;
  double g_norm = norm(start.g);
  if (g_norm <= 0.75 * params.eps) {
    result.p = p;
    result.g_norm = g_norm;
    result.counts = oracle.counts();
    return result;
  }

  const double root_kx = std::sqrt(params.kappa_x);
  for (int k = 1; k <= caps.max_epochs; ++k) {
    EpochContext ctx(oracle, params, p, warm);
    ctx.seed(p, std::move(start));
    ctx.iterates = {p};
    ctx.tildes = {p};

    EpochTrace trace;
    trace.k = k;
    trace.phi_start = ctx.eval(p).phi;

    auto stall = [&](const std::string& why) {
      trace.iterates = ctx.iterates;
      trace.oracle_calls = oracle.counts();
      traces.push_back(trace);
      throw RunStall(why, std::move(traces), oracle.counts());
    };

    CertifyResult verdict;
    double e_max = 0.0;
    try {
      for (int t = 1;; ++t) {
        if (t > caps.max_inner) {
          stall("epoch " + std::to_string(k) + " exceeded the inner cap of " +
                std::to_string(caps.max_inner));
        }
        // Warm start: the previous step's w shifted by the momentum term.
        const DenseVector warm_x =
            t == 1 ? ctx.tildes[0]
                   : lincomb(1.0, *verdict.outcome.w, params.omega,
                             ctx.iterates[t - 1] - ctx.iterates[t - 2]);
        CertifiedSolution sol = ctx.prox_solve(ctx.tildes[t - 1], std::nullopt, warm_x);
        const DenseVector& prev = ctx.iterates[t - 1];
        ctx.tildes.push_back(lincomb(1.0 + params.omega, sol.x, -params.omega, prev));
        ctx.iterates.push_back(std::move(sol.x));

        verdict = certify(ctx, t);
        trace.flags.push_back(verdict.outcome.flag);
        trace.e_values.push_back(verdict.e_value);
        trace.t_k = t;
        if (verdict.outcome.flag != Flag::Null) break;

        // Every null verdict at step t implies t <= 6 sqrt(kappa_x) log(3200 gamma E / eps^2).
        e_max = std::max(e_max, verdict.e_value);
        const double lemma_bound =
            1.0 + 6.0 * root_kx *
                      std::max(0.0, std::log(3200.0 * params.gamma * e_max /
                                             (params.eps * params.eps)));
        if (t > 4.0 * lemma_bound) {
          std::ostringstream msg;
          msg << "epoch " << k << " ran " << t << " steps, above 4x the epoch-length bound "
              << lemma_bound;
          stall(msg.str());
        }
      }
    } catch (const SolverStall& e) {
      stall(std::string("inner solver stalled: ") + e.what());
    }

    trace.final_flag = verdict.outcome.flag;
    trace.recomputed = verdict.recomputed;
    trace.w = verdict.outcome.w;

    DenseVector next;
    try {
      switch (verdict.outcome.flag) {
        case Flag::F3:
        case Flag::F5:
          next = *verdict.outcome.w;
          trace.branch = Branch::Prox;
          break;
        default: {
          const DenseVector* best = &ctx.iterates[0];
          double best_phi = ctx.eval(*best).phi;
          for (std::size_t s = 1; s < ctx.iterates.size(); ++s) {
            const double v = ctx.eval(ctx.iterates[s]).phi;
            if (v < best_phi) {
              best_phi = v;
              best = &ctx.iterates[s];
            }
          }
          if (verdict.outcome.w) {
            const double v = ctx.eval(*verdict.outcome.w).phi;
            if (v < best_phi) {
              best_phi = v;
              best = &*verdict.outcome.w;
            }
          }
          if (best_phi < trace.phi_start - params.candidate_threshold()) {
            next = *best;
            trace.branch = Branch::BestCandidate;
          } else {
            ExploitResult ex = exploit_ncvx(ctx, verdict.outcome.w);
            next = std::move(ex.p);
            trace.nc_pair = std::move(ex.pair);
            trace.branch = Branch::NcExploit;
          }
        }
      }
      start = ctx.eval(next);
    } catch (const SolverStall& e) {
      stall(std::string("inner solver stalled: ") + e.what());
    }

    p = std::move(next);
    g_norm = norm(start.g);
    trace.iterates = std::move(ctx.iterates);
    trace.p = p;
    trace.phi_end = start.phi;
    trace.descent_est = trace.phi_end - trace.phi_start;
    trace.g_norm = g_norm;
    trace.oracle_calls = oracle.counts();
    traces.push_back(std::move(trace));

    if (g_norm <= 0.75 * params.eps) {
      result.p = std::move(p);
      result.g_norm = g_norm;
      result.traces = std::move(traces);
      result.counts = oracle.counts();
      return result;
    }
  }
  throw RunStall("epoch cap of " + std::to_string(caps.max_epochs) + " reached", std::move(traces),
                 oracle.counts());
}

}  // namespace iapun
