// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Optional arguments select criteria by number.

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "iapun/bench/experiment.hpp"
#include "iapun/errors.hpp"
#include "iapun/families.hpp"
#include "iapun/hard_instance.hpp"
#include "iapun/iapun.hpp"
#include "iapun/inner_solvers.hpp"
#include "iapun/params.hpp"
#include "oracles.hpp"

using namespace iapun;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

// Exact Phi and its gradient for an instance.
using PhiFn = std::function<double(std::span<const double>, std::span<double>)>;

struct Case {
  std::string name;
  MinimaxProblem problem;
  DenseVector p0;
  IapunParams params;
  PhiFn phi;
  double phi_star = 0.0;
  // Filled by the run.
  RunResult result;
  double seconds = 0.0;
  std::string error;
};

DenseVector uniform_point(std::mt19937_64& rng, std::size_t n, double r) {
  std::uniform_real_distribution<double> unif(-r, r);
  DenseVector x(n);
  for (double& v : x) v = unif(rng);
  return x;
}

double exact_phi(const Case& c, const DenseVector& x) { return c.phi(x, {}); }

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

// Five rippled coupled-quadratic instances under the theory schedule and five
// scaled hard instances under the practical schedule.
std::vector<Case> soundness_cases() {
  std::vector<Case> cases;
  for (std::uint64_t seed : {1, 3, 4, 5, 10}) {
    families::RandomOptions o;
    o.ripple = 1.5;
    const families::CoupledQuadraticSpec spec = families::random_instance(seed, o);
    Case c;
    c.name = spec.name;
    c.problem = families::build(spec);
    std::mt19937_64 rng(0);
    c.p0 = uniform_point(rng, spec.dim_x(), 1.0);
    c.params = derive_params(c.problem.spec, 0.1, ParamPolicy::theory);
    c.phi = [spec](std::span<const double> x, std::span<double> g) {
      return families::phi(spec, x, g);
    };
    c.phi_star = families::phi_star(spec).value;
    cases.push_back(std::move(c));
  }
  struct HardSetting {
    double ell, mu, l2, delta, eps;
  };
  const HardSetting hard_settings[] = {{1.0, 1.0, 0.1, 10.0, 0.01},
                                       {1.0, 0.1, 0.1, 17.7828, 0.01},
                                       {1.0, 0.01, 1.0, 0.1, 1e-3},
                                       {1.0, 0.1, 1.0, 0.177828, 1e-3},
                                       {3.16228, 0.01, 1.0, 5.62341, 0.01}};
  int index = 0;
  for (const HardSetting& h : hard_settings) {
    hard::ScaledInstance s = hard::scale_instance(h.ell, h.mu, h.l2, h.delta, h.eps);
    Case c;
    c.name = "hard_" + std::to_string(index++) + "_T" + std::to_string(s.spec.t_blocks);
    c.problem = std::move(s.problem);
    c.p0 = DenseVector(c.problem.dim_x);
    c.params = derive_params(c.problem.spec, h.eps, ParamPolicy::practical);
    const hard::HardInstanceSpec spec = s.spec;
    c.phi = [spec](std::span<const double> x, std::span<double> g) {
      return hard::phi_closed_form(x, spec, g);
    };
    // Every term of the chain function is nonnegative and all vanish at x = (lambda, ..., lambda).
    c.phi_star = 0.0;
    cases.push_back(std::move(c));
  }
  return cases;
}

void run_cases(std::vector<Case>& cases) {
  for (Case& c : cases) {
    const auto start = std::chrono::steady_clock::now();
    try {
      c.result = run(c.problem, c.p0, c.params);
    } catch (const std::exception& e) {
      c.error = e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
}

Verdict criterion1(const std::vector<Case>& cases) {
  Verdict v;
  double worst_time = 0.0;
  for (const Case& c : cases) {
    worst_time = std::max(worst_time, c.seconds);
    if (!c.error.empty()) {
      v.pass = false;
      v.detail += c.name + " failed: " + c.error + "; ";
      continue;
    }
    DenseVector g(c.problem.dim_x);
    c.phi(c.result.p, g);
    const bool ok = norm(g) <= c.params.eps && c.seconds <= 60.0 && c.problem.dim_x <= 50 &&
                    c.problem.dim_y <= 200;
    if (!ok) {
      v.pass = false;
      v.detail += c.name + fmt(": |grad| %.3g vs eps %.3g in %.1fs; ", norm(g), c.params.eps,
                               c.seconds);
    }
  }
  v.detail += std::to_string(cases.size()) + " instances, slowest " + fmt("%.2fs", worst_time);
  return v;
}

Verdict criterion2(const std::vector<Case>& cases) {
  Verdict v;
  int epochs = 0, violations = 0;
  for (const Case& c : cases) {
    if (!c.error.empty()) continue;
    const double bound = c.params.epoch_descent();
    DenseVector prev = c.p0;
    const auto& tr = c.result.traces;
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
      ++epochs;
      const double change = exact_phi(c, tr[k].p) - exact_phi(c, prev);
      if (change > -bound + 0.01 * bound) {
        ++violations;
        if (violations <= 3) {
          v.detail += c.name + fmt(" epoch %.0f: change %.3g vs bound %.3g; ", tr[k].k, change, -bound);
        }
      }
      prev = tr[k].p;
    }
  }
  v.pass = violations == 0 && epochs > 0;
  v.detail += std::to_string(epochs) + " non-terminal epochs, " + std::to_string(violations) +
              " violations";
  return v;
}

Verdict criterion3(const std::vector<Case>& cases) {
  Verdict v;
  int checked = 0, violations = 0;
  double tightest = 0.0;
  for (const Case& c : cases) {
    if (!c.error.empty()) continue;
    ++checked;
    const IapunParams& p = c.params;
    const double bound =
        1.0 + 72.0 * std::sqrt(p.l2) * (exact_phi(c, c.p0) - c.phi_star) / std::pow(p.eps, 1.5);
    const double k = static_cast<double>(c.result.traces.size());
    tightest = std::max(tightest, k / bound);
    if (k > bound) {
      ++violations;
      v.detail += c.name + fmt(": K = %.0f above %.4g; ", k, bound);
    }
  }
  v.pass = violations == 0 && checked > 0;
  v.detail += std::to_string(checked) + " runs, max K / bound " + fmt("%.3g", tightest);
  return v;
}

Verdict criterion4(const std::vector<Case>& cases) {
  Verdict v;
  int epochs = 0, violations = 0;
  for (const Case& c : cases) {
    if (!c.error.empty()) continue;
    const IapunParams& p = c.params;
    for (const EpochTrace& tr : c.result.traces) {
      ++epochs;
      const double gap = exact_phi(c, tr.iterates.front()) - c.phi_star + 2.0 * p.delta_y;
      const double bound =
          1.0 + 6.0 * std::sqrt(p.gamma / p.alpha) *
                    std::max(0.0, std::log(3200.0 * p.gamma * gap / (p.eps * p.eps)));
      if (tr.t_k > bound) {
        ++violations;
        if (violations <= 3) v.detail += c.name + fmt(": T_k = %.0f above %.4g; ", tr.t_k, bound);
      }
    }
  }
  v.pass = violations == 0 && epochs > 0;
  v.detail += std::to_string(epochs) + " epochs, " + std::to_string(violations) + " violations";
  return v;
}

// Strong-convexity violation of a returned pair under exact evaluation.
struct PairCheck {
  bool violated = false;
  bool close = false;
};

PairCheck check_pair(const PhiFn& phi, const NcPair& pair, const IapunParams& prm) {
  DenseVector gv(pair.v.size());
  const double fv = phi(pair.v, gv);
  const double fu = phi(pair.u, {});
  const DenseVector d = pair.u - pair.v;
  const double lhs = fu - fv - dot(gv, d) + 0.5 * prm.alpha * norm_squared(d);
  return {lhs < 0.0, norm(d) <= prm.alpha / (2.0 * prm.l2) * (1.0 + 1e-12)};
}

Verdict criterion5(const std::vector<Case>& cases) {
  Verdict v;
  int from_runs = 0, bad = 0;
  for (const Case& c : cases) {
    if (!c.error.empty()) continue;
    for (const EpochTrace& tr : c.result.traces) {
      if (tr.branch != Branch::NcExploit || !tr.nc_pair) continue;
      ++from_runs;
      const PairCheck pc = check_pair(c.phi, *tr.nc_pair, c.params);
      if (!pc.violated || !pc.close) ++bad;
    }
  }

  // Forced invocations: iterate sequences placed by hand inside the ball
  // around p on rippled instances, so that some consecutive pairs straddle
  // strongly concave stretches and some sit near the alpha threshold.
  int forced = 0, none_found = 0;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    families::RandomOptions o;
    o.dim_x = 1 + seed % 4;
    o.dim_y = 2 * o.dim_x;
    o.ripple = 1.0 + 5.0 * unit(rng);
    o.ripple_width = 0.05 + 0.5 * unit(rng);
    const families::CoupledQuadraticSpec spec = families::random_instance(seed + 7, o);
    const MinimaxProblem problem = families::build(spec);
    const double eps = std::pow(10.0, -1.0 - 1.5 * unit(rng));
    IapunParams prm;
    try {
      prm = derive_params(problem.spec, eps, ParamPolicy::practical);
    } catch (const Error&) {
      continue;
    }
    CountedOracle oracle(problem);
    WarmStarts warm;
    DenseVector p = uniform_point(rng, spec.dim_x(), 1.0);
    EpochContext ctx(oracle, prm, p, warm);
    const std::size_t steps = 2 + seed % 5;
    DenseVector dir = uniform_point(rng, spec.dim_x(), 1.0);
    dir *= 1.0 / norm(dir);
    ctx.iterates = {p};
    for (std::size_t s = 1; s <= steps; ++s) {
      const double r = prm.ball_radius() * unit(rng);
      DenseVector x = p;
      axpy((s % 2 == 0 ? r : -r), dir, x);
      ctx.iterates.push_back(std::move(x));
    }
    ctx.tildes = ctx.iterates;
    std::optional<DenseVector> w;
    if (unit(rng) < 0.5) {
      DenseVector x = p;
      axpy(prm.ball_radius() * (2.0 * unit(rng) - 1.0), dir, x);
      w = std::move(x);
    }
    const PhiFn phi = [spec](std::span<const double> x, std::span<double> g) {
      return families::phi(spec, x, g);
    };
    try {
      const ExploitResult ex = exploit_ncvx(ctx, w);
      ++forced;
      const PairCheck pc = check_pair(phi, ex.pair, prm);
      if (!pc.violated || !pc.close) {
        ++bad;
        if (bad <= 3) v.detail += "seed " + std::to_string(seed) + " pair not sound; ";
      }
    } catch (const InvariantViolation&) {
      ++none_found;
    }
  }
  v.pass = bad == 0 && from_runs + forced > 0;
  v.detail += std::to_string(from_runs) + " invocations in runs, " + std::to_string(forced) +
              " forced (" + std::to_string(none_found) + " traces without a pair), " +
              std::to_string(bad) + " unsound";
  return v;
}

Verdict criterion6() {
  Verdict v;
  double worst_max = 0.0, worst_fd = 0.0, worst_a = 0.0, worst_ratio = 1e300;
  for (std::size_t n : {10u, 20u}) {
    const Eigen::MatrixXd a =
        oracle::block_matrix(n) - Eigen::MatrixXd::Identity(n, n) / static_cast<double>(n * n);
    worst_a = std::max(worst_a, Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a)
                                    .eigenvalues()
                                    .cwiseAbs()
                                    .maxCoeff());
    for (int t : {2, 3}) {
      const hard::HardInstanceSpec spec = hard::unscaled_spec(t, 0.5, n);
      const MinimaxProblem p = hard::build_problem(spec);
      std::mt19937_64 rng(100 * n + t);
      for (int i = 0; i < 100; ++i) {
        const DenseVector x = uniform_point(rng, spec.dim_x(), 1.5);
        worst_max = std::max(
            worst_max, std::abs(oracle::hard_maximize(spec, x).value - hard::phi_closed_form(x, spec)));

        const DenseVector y = uniform_point(rng, spec.dim_y(), 1.0);
        DenseVector gx(spec.dim_x()), gy(spec.dim_y()), gphi(spec.dim_x());
        p.objective->grad_x(x, y, gx);
        p.objective->grad_y(x, y, gy);
        hard::phi_closed_form(x, spec, gphi);
        const DenseVector fx = finite_diff_grad(
            [&](std::span<const double> z) { return p.objective->value(z, y); }, x);
        const DenseVector fy = finite_diff_grad(
            [&](std::span<const double> z) { return p.objective->value(x, z); }, y);
        const DenseVector fphi = finite_diff_grad(
            [&](std::span<const double> z) { return hard::phi_closed_form(z, spec); }, x);
        worst_fd = std::max({worst_fd, distance(gx, fx) / norm(gx), distance(gy, fy) / norm(gy),
                             distance(gphi, fphi) / norm(gphi)});
      }
      for (double nu : {1.0, 0.1}) {
        const hard::HardInstanceSpec sn = hard::unscaled_spec(t, nu, n);
        for (int i = 0; i < 50; ++i) {
          DenseVector x = uniform_point(rng, sn.dim_x(), 1.5);
          x[2 * t - 1] = 0.0;
          x[2 * t] = 0.0;
          DenseVector g(sn.dim_x());
          hard::phi_closed_form(x, sn, g);
          worst_ratio = std::min(worst_ratio, norm(g) / (std::pow(nu, 0.75) / 4.0));
        }
      }
    }
  }
  v.pass = worst_max <= 1e-8 && worst_a <= 4.0 && worst_fd <= 1e-5 && worst_ratio > 1.0;
  v.detail = fmt("max-out error %.2e, ||A|| %.6f, ", worst_max, worst_a) +
             fmt("FD rel error %.2e, min |grad| / (nu^.75/4) %.3g", worst_fd, worst_ratio);
  return v;
}

Verdict criterion7() {
  Verdict v;
  const hard::HardInstanceSpec spec = hard::unscaled_spec(2, 1.0, 10);
  const std::size_t prefix = 2 + spec.n + 2;
  const hard::SupportReport r = hard::track_support(spec, static_cast<int>(prefix));
  const std::vector<std::size_t> order = hard::expected_chain_order(spec);
  bool prefix_ok = r.visited.size() == prefix;
  for (std::size_t i = 0; prefix_ok && i < prefix; ++i) prefix_ok = r.visited[i] == order[i];
  v.pass = r.order_respected && prefix_ok;
  std::string labels;
  for (const std::string& l : r.labels) labels += (labels.empty() ? "" : " ") + l;
  v.detail = std::to_string(r.visited.size()) + " coordinates: " + labels;
  if (!r.violation.empty()) v.detail += "; " + r.violation;
  return v;
}

Verdict criterion8() {
  Verdict v;
  const nlohmann::json j = {
      {"schema_version", 1},
      {"instances", {{{"id", "ramp"}, {"family", "ramp"}, {"params", nlohmann::json::object()}}}},
      {"solvers", {"iapun", "inexact_appa"}},
      {"eps", {1e-1, std::pow(10.0, -1.5), 1e-2, std::pow(10.0, -2.5), 1e-3}},
      {"param_policy", "practical"},
      {"caps", {{"max_epochs", 200000}, {"max_inner", 200000}}},
      {"threads", static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 10u))}};
  const bench::ExperimentConfig config = bench::parse_config(j);
  const std::vector<bench::RunRecord> records = bench::run_experiment(config);
  for (const bench::RunRecord& r : records) {
    if (!r.success()) {
      v.pass = false;
      v.detail += r.solver + fmt(" at eps %.3g failed: ", r.eps) + r.message + "; ";
    }
  }
  if (!v.pass) return v;
  const double s_iapun = bench::slope_fit(records, "iapun");
  const double s_appa = bench::slope_fit(records, "inexact_appa");
  v.pass = s_iapun <= s_appa - 0.1 && s_iapun >= 1.4 && s_iapun <= 2.0;
  v.detail = fmt("slope iapun %.3f, inexact_appa %.3f (need iapun <= appa - 0.1, in [1.4, 2.0])",
                 s_iapun, s_appa);
  return v;
}

Verdict criterion9() {
  Verdict v;
  int bad_gap = 0, bad_radius = 0;
  double worst_gap_ratio = 0.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const oracle::RandomSubproblem r = oracle::random_subproblem(seed);
    const MinimaxProblem p = families::build(r.spec);
    const oracle::QuadraticPhi q = oracle::quadratic_phi(r.spec);
    const CertifiedSolution s = saddle_prox_solve(p, r.sub, {}, r.delta_x);
    const Eigen::VectorXd xs = oracle::subproblem_minimizer(q, r.sub);
    const Eigen::VectorXd x = oracle::to_eigen(s.x);
    const double ref = oracle::subproblem_value(q, r.sub, xs);
    const double gap = oracle::subproblem_value(q, r.sub, x) - ref;
    // Rounding in the two reference evaluations.
    const double slack = 1e-14 * std::max(1.0, std::abs(ref));
    if (gap > s.suboptimality_bound + slack) ++bad_gap;
    if ((x - xs).norm() > oracle::radius_bound(r.delta_x, r.sub)) ++bad_radius;
    if (s.suboptimality_bound > 0.0) worst_gap_ratio = std::max(worst_gap_ratio, gap / s.suboptimality_bound);
  }
  v.pass = bad_gap == 0 && bad_radius == 0;
  v.detail = "200 subproblems, " + std::to_string(bad_gap) + " gap and " +
             std::to_string(bad_radius) + " radius violations, max gap / bound " +
             fmt("%.3g", worst_gap_ratio);
  return v;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Verdict criterion10() {
  Verdict v;
  const auto dir = std::filesystem::temp_directory_path() / "iapun_acceptance_determinism";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const nlohmann::json j = {
      {"schema_version", 1},
      {"instances",
       {{{"id", "cq1"}, {"family", "coupled_quadratic"}, {"params", {{"seed", 1}, {"ripple", 1.5}}}},
        {{"id", "cq3"}, {"family", "coupled_quadratic"}, {"params", {{"seed", 3}, {"ripple", 1.5}}}},
        {{"id", "ramp"}, {"family", "ramp"}}}},
      {"solvers", {"iapun", "inexact_appa", "gda"}},
      {"eps", {0.1, 0.05}},
      {"param_policy", "practical"},
      {"threads", 4}};
  std::ofstream(dir / "config.json") << j.dump(2);
  std::vector<std::string> outputs;
  for (const char* name : {"a.csv", "b.csv"}) {
    const std::string cmd = std::string(IAPUN_BENCH_EXE) + " run " + (dir / "config.json").string() +
                            " --out " + (dir / name).string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status != 0) {
      v.pass = false;
      v.detail = "bench run exited with status " + std::to_string(status);
      return v;
    }
    outputs.push_back(slurp(dir / name));
  }
  const std::string a = bench::strip_wall_time(outputs[0]);
  const std::string b = bench::strip_wall_time(outputs[1]);
  v.pass = !a.empty() && a == b;
  v.detail = std::to_string(std::count(a.begin(), a.end(), '\n')) + " CSV lines, " +
             (a == b ? "identical" : "different") + " without wall time";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  const auto wanted = [&](int id) { return selected.empty() || selected.contains(id); };

  int failed = 0;
  const auto report = [&](int id, const char* title, const std::function<Verdict()>& check) {
    if (!wanted(id)) return;
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !v.pass;
    std::printf("criterion %2d %s %-26s %s [%.1fs]\n", id, v.pass ? "PASS" : "FAIL", title,
                v.detail.c_str(), secs);
    std::fflush(stdout);
  };

  std::vector<Case> cases;
  if (wanted(1) || wanted(2) || wanted(3) || wanted(4) || wanted(5)) {
    cases = soundness_cases();
    run_cases(cases);
  }
  report(1, "termination", [&] { return criterion1(cases); });
  report(2, "per-epoch descent", [&] { return criterion2(cases); });
  report(3, "epoch count", [&] { return criterion3(cases); });
  report(4, "epoch length", [&] { return criterion4(cases); });
  report(5, "nc-pair soundness", [&] { return criterion5(cases); });
  report(6, "hard-instance correctness", criterion6);
  report(7, "zero-chain order", criterion7);
  report(8, "scaling band", criterion8);
  report(9, "inner certificates", criterion9);
  report(10, "determinism", criterion10);
  return failed == 0 ? 0 : 1;
}
