#include "iapun/bench/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "iapun/bench/experiment.hpp"
#include "iapun/params.hpp"

namespace iapun::bench {

using nlohmann::json;

namespace {

const std::set<std::string> kFamilies{"coupled_quadratic", "ramp", "hard"};
const std::set<std::string> kSolvers{"iapun", "inexact_appa", "gda"};

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + ": bad '" + key + "': " + e.what());
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
  return j.contains(key) ? get<T>(j, key, where) : fallback;
}

}  // namespace

bool known_solver(const std::string& name) { return kSolvers.contains(name); }

ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir) {
  require_keys(j,
               {"schema_version", "instances", "solvers", "eps", "seeds", "output", "caps",
                "threads", "param_policy"},
               "config");
  ExperimentConfig c;
  c.schema_version = get<int>(j, "schema_version", "config");
  if (c.schema_version != kSchemaVersion) {
    throw ConfigError("config: unsupported schema_version " + std::to_string(c.schema_version));
  }
  const json& inst = j.contains("instances") ? j.at("instances") : json();
  if (!inst.is_array() || inst.empty()) throw ConfigError("config: 'instances' must be a non-empty array");
  for (std::size_t i = 0; i < inst.size(); ++i) {
    const std::string where = "instances[" + std::to_string(i) + "]";
    require_keys(inst[i], {"id", "family", "params", "path"}, where);
    InstanceConfig ic;
    ic.id = get<std::string>(inst[i], "id", where);
    ic.family = get<std::string>(inst[i], "family", where);
    if (inst[i].contains("params")) ic.params = inst[i].at("params");
    if (inst[i].contains("path")) {
      std::filesystem::path p = get<std::string>(inst[i], "path", where);
      if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
      ic.path = p.string();
    }
    c.instances.push_back(std::move(ic));
  }
  c.solvers = get<std::vector<std::string>>(j, "solvers", "config");
  c.eps_grid = get<std::vector<double>>(j, "eps", "config");
  c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", c.seeds, "config");
  if (j.contains("output")) {
    require_keys(j.at("output"), {"path", "format"}, "output");
    c.out_path = get_or<std::string>(j.at("output"), "path", "", "output");
    c.format = get_or<std::string>(j.at("output"), "format", c.format, "output");
  }
  if (j.contains("caps")) {
    const json& caps = j.at("caps");
    require_keys(caps, {"max_epochs", "max_inner", "max_steps"}, "caps");
    c.caps.max_epochs = get_or<int>(caps, "max_epochs", c.caps.max_epochs, "caps");
    c.caps.max_inner = get_or<int>(caps, "max_inner", c.caps.max_inner, "caps");
    c.baseline_max_steps =
        get_or<std::int64_t>(caps, "max_steps", c.baseline_max_steps, "caps");
  }
  c.threads = get_or<int>(j, "threads", c.threads, "config");
  try {
    c.policy = policy_from_string(get_or<std::string>(j, "param_policy", "theory", "config"));
  } catch (const Error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j, path.parent_path());
}

void validate(const ExperimentConfig& c) {
  if (c.solvers.empty()) throw ConfigError("config: no solvers");
  for (const std::string& s : c.solvers) {
    if (!known_solver(s)) throw ConfigError("config: unknown solver '" + s + "'");
  }
  if (c.eps_grid.empty()) throw ConfigError("config: empty eps grid");
  for (std::size_t i = 0; i < c.eps_grid.size(); ++i) {
    if (!(c.eps_grid[i] > 0.0)) throw ConfigError("config: eps values must be positive");
    if (i > 0 && !(c.eps_grid[i] < c.eps_grid[i - 1])) {
      throw ConfigError("config: eps grid must be strictly decreasing");
    }
  }
  if (c.format != "csv" && c.format != "json") {
    throw ConfigError("config: format must be csv or json");
  }
  if (c.caps.max_epochs <= 0 || c.caps.max_inner <= 0 || c.baseline_max_steps <= 0) {
    throw ConfigError("config: caps must be positive");
  }
  if (c.threads <= 0) throw ConfigError("config: threads must be positive");
  if (c.seeds.empty()) throw ConfigError("config: seeds must not be empty");
  std::set<std::string> ids;
  for (const InstanceConfig& ic : c.instances) {
    if (ic.id.empty() || !ids.insert(ic.id).second) {
      throw ConfigError("config: instance ids must be unique and non-empty");
    }
    if (!kFamilies.contains(ic.family)) {
      throw ConfigError("instance " + ic.id + ": unknown family '" + ic.family + "'");
    }
    if (!ic.path.empty() && ic.family != "hard") {
      throw ConfigError("instance " + ic.id + ": only hard instances load from a path");
    }
    for (double eps : c.eps_grid) {
      try {
        const BuiltInstance b = build_instance(ic, eps, c.seeds);
        (void)derive_params(b.problem.spec, eps, c.policy);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& e) {
        std::ostringstream msg;
        msg << "instance " << ic.id << " at eps " << eps << ": " << e.what();
        throw ConfigError(msg.str());
      }
    }
  }
}

}  // namespace iapun::bench
