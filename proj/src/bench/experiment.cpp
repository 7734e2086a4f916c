#include "iapun/bench/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "iapun/baselines.hpp"
#include "iapun/families.hpp"
#include "iapun/hard_instance.hpp"
#include "iapun/params.hpp"

namespace iapun::bench {

using nlohmann::json;

namespace {

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& id) {
  if (!j.is_object()) throw ConfigError("instance " + id + ": params must be an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : keys) ok = ok || key == k;
    if (!ok) throw ConfigError("instance " + id + ": unknown parameter '" + key + "'");
  }
}

template <class T>
T param(const json& j, const char* key, T fallback, const std::string& id) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("instance " + id + ": bad parameter '" + key + "': " + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

BuiltInstance coupled(const InstanceConfig& ic, const std::vector<std::uint64_t>& seeds) {
  const json& j = ic.params;
  only_keys(j,
            {"seed", "dim_x", "dim_y", "mu", "coupling", "curvature", "ripple", "ripple_width",
             "convex", "l2", "start", "start_radius"},
            ic.id);
  families::RandomOptions o;
  o.dim_x = param<std::size_t>(j, "dim_x", o.dim_x, ic.id);
  o.dim_y = param<std::size_t>(j, "dim_y", o.dim_y, ic.id);
  o.mu = param<double>(j, "mu", o.mu, ic.id);
  o.coupling = param<double>(j, "coupling", o.coupling, ic.id);
  o.curvature = param<double>(j, "curvature", o.curvature, ic.id);
  o.ripple = param<double>(j, "ripple", o.ripple, ic.id);
  o.ripple_width = param<double>(j, "ripple_width", o.ripple_width, ic.id);
  o.convex = param<bool>(j, "convex", o.convex, ic.id);
  families::CoupledQuadraticSpec spec =
      families::random_instance(param<std::uint64_t>(j, "seed", 0, ic.id), o);
  spec.name = ic.id;
  spec.declared_l2 = param<double>(j, "l2", spec.declared_l2, ic.id);
  BuiltInstance b;
  b.problem = families::build(spec);
  if (j.contains("start")) {
    b.p0 = DenseVector(param<std::vector<double>>(j, "start", {}, ic.id));
    if (b.p0.size() != spec.dim_x()) throw ConfigError("instance " + ic.id + ": bad start size");
  } else {
    const double r = param<double>(j, "start_radius", 1.0, ic.id);
    std::mt19937_64 rng(seeds.front());
    std::uniform_real_distribution<double> unif(-r, r);
    b.p0 = DenseVector(spec.dim_x());
    for (std::size_t i = 0; i < spec.dim_x(); ++i) b.p0[i] = unif(rng);
  }
  return b;
}

BuiltInstance ramp(const InstanceConfig& ic, double eps) {
  const json& j = ic.params;
  only_keys(j,
            {"ell", "kappa_y", "rho", "eps_max", "delta", "ripple_alpha", "slope_margin",
             "coupling"},
            ic.id);
  families::RampOptions o;
  o.ell = param<double>(j, "ell", o.ell, ic.id);
  o.kappa_y = param<double>(j, "kappa_y", o.kappa_y, ic.id);
  o.rho = param<double>(j, "rho", o.rho, ic.id);
  o.eps_max = param<double>(j, "eps_max", o.eps_max, ic.id);
  o.delta = param<double>(j, "delta", o.delta, ic.id);
  o.ripple_alpha = param<double>(j, "ripple_alpha", o.ripple_alpha, ic.id);
  o.slope_margin = param<double>(j, "slope_margin", o.slope_margin, ic.id);
  o.coupling = param<double>(j, "coupling", o.coupling, ic.id);
  families::RampInstance r = families::ramp_instance(o, eps);
  r.spec.name = ic.id;
  return {families::build(r.spec), r.p0};
}

BuiltInstance hard_instance(const InstanceConfig& ic, double eps) {
  BuiltInstance b;
  if (!ic.path.empty()) {
    if (!ic.params.empty()) throw ConfigError("instance " + ic.id + ": give params or path, not both");
    const hard::HardInstanceSpec spec = hard::spec_from_json(read_file(ic.path));
    if (spec.scaled) {
      const double ceiling =
          std::min(hard::eps_ceiling_smoothness(spec.target_ell, spec.target_l2),
                   hard::eps_ceiling_gap(spec.target_ell, spec.target_l2, spec.target_delta));
      if (eps > ceiling) {
        std::ostringstream msg;
        msg << "instance " << ic.id << ": eps " << eps << " above the ceiling " << ceiling;
        throw ConfigError(msg.str());
      }
    }
    b.problem = hard::build_problem(spec);
  } else {
    const json& j = ic.params;
    only_keys(j, {"ell", "mu", "l2", "delta"}, ic.id);
    hard::ScaledInstance s = hard::scale_instance(
        param<double>(j, "ell", 1.0, ic.id), param<double>(j, "mu", 1.0, ic.id),
        param<double>(j, "l2", 1.0, ic.id), param<double>(j, "delta", 1.0, ic.id), eps);
    b.problem = std::move(s.problem);
  }
  b.problem.name = ic.id;
  b.p0 = DenseVector(b.problem.dim_x);
  return b;
}

std::vector<EpochRow> rows_of(const std::vector<EpochTrace>& traces, const char* branch) {
  std::vector<EpochRow> rows;
  for (const EpochTrace& t : traces) {
    EpochRow r;
    r.epoch = t.k;
    r.t_k = t.t_k;
    r.flag = to_string(t.final_flag);
    r.branch = branch != nullptr ? branch : to_string(t.branch);
    r.descent = t.descent_est;
    r.cumulative = t.oracle_calls;
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace

BuiltInstance build_instance(const InstanceConfig& instance, double eps,
                             const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("build_instance: no seeds");
  if (instance.family == "coupled_quadratic") return coupled(instance, seeds);
  if (instance.family == "ramp") return ramp(instance, eps);
  if (instance.family == "hard") return hard_instance(instance, eps);
  throw ConfigError("instance " + instance.id + ": unknown family '" + instance.family + "'");
}

double verified_grad_norm(const MinimaxProblem& problem, const DenseVector& x) {
  if (problem.has_reference()) {
    DenseVector g(problem.dim_x);
    problem.reference->grad_phi(x, g);
    return norm(g);
  }
  return norm(phi_oracle(problem, x, 1e-14, 1e-10).g);
}

RunRecord run_cell(const ExperimentConfig& config, const InstanceConfig& instance,
                   const std::string& solver, double eps) {
  RunRecord rec;
  rec.solver = solver;
  rec.instance = instance.id;
  rec.eps = eps;
  rec.status = "failed";
  rec.final_grad_norm = std::nan("");
  const auto start = std::chrono::steady_clock::now();
  auto finish = [&] {
    rec.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    const BuiltInstance b = build_instance(instance, eps, config.seeds);
    DenseVector x;
    if (solver == "iapun") {
      const IapunParams params = derive_params(b.problem.spec, eps, config.policy);
      RunResult r = run(b.problem, b.p0, params, config.caps);
      rec.totals = r.counts;
      rec.epochs = static_cast<int>(r.traces.size());
      rec.rows = rows_of(r.traces, nullptr);
      x = std::move(r.p);
    } else {
      BaselineConfig bc;
      bc.method = solver == "gda" ? BaselineMethod::gda : BaselineMethod::inexact_appa;
      bc.eps = eps;
      bc.max_steps = config.baseline_max_steps;
      BaselineResult r = run_baseline(b.problem, b.p0, bc);
      rec.totals = r.counts;
      rec.epochs = static_cast<int>(r.steps);
      rec.rows = rows_of(r.traces, solver == "gda" ? "gda" : "prox");
      x = std::move(r.x);
    }
    rec.final_grad_norm = verified_grad_norm(b.problem, x);
    if (rec.final_grad_norm <= eps) {
      rec.status = "success";
    } else {
      std::ostringstream msg;
      msg << "verified gradient norm " << rec.final_grad_norm << " exceeds eps";
      rec.message = msg.str();
    }
  } catch (const RunStall& e) {
    rec.message = e.what();
    rec.totals = e.counts();
    rec.epochs = static_cast<int>(e.traces().size());
    rec.rows = rows_of(e.traces(), solver == "iapun" ? nullptr : solver == "gda" ? "gda" : "prox");
  } catch (const std::exception& e) {
    rec.message = e.what();
  }
  finish();
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& config) {
  validate(config);
  struct Cell {
    const InstanceConfig* instance;
    std::string solver;
    double eps;
  };
  std::vector<Cell> cells;
  for (const InstanceConfig& ic : config.instances) {
    for (const std::string& s : config.solvers) {
      for (double eps : config.eps_grid) cells.push_back({&ic, s, eps});
    }
  }
  std::vector<RunRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      records[i] = run_cell(config, *cells[i].instance, cells[i].solver, cells[i].eps);
    }
  };
  const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), cells.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (!config.out_path.empty()) write_records(config.out_path, config.format, records);
  return records;
}

void write_records(const std::string& path, const std::string& format,
                   const std::vector<RunRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << (format == "json" ? to_json(records) : to_csv(records));
  if (!out) throw Error("write failed for " + path);
}

}  // namespace iapun::bench
