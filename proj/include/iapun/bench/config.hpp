#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "iapun/iapun.hpp"
#include "iapun/params.hpp"

namespace iapun::bench {

inline constexpr int kSchemaVersion = 1;

// One instance entry. family is "coupled_quadratic", "ramp" or "hard"; hard
// instances take either scaling parameters or a path to a serialized spec.
struct InstanceConfig {
  std::string id;
  std::string family;
  nlohmann::json params = nlohmann::json::object();
  std::string path;  // resolved against the config file's directory
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::vector<InstanceConfig> instances;
  std::vector<std::string> solvers;  // "iapun", "inexact_appa", "gda"
  std::vector<double> eps_grid;      // strictly decreasing
  std::vector<std::uint64_t> seeds{0};
  std::string out_path;
  std::string format = "csv";
  ParamPolicy policy = ParamPolicy::theory;  // IAPUN tolerance schedule
  RunCaps caps;
  std::int64_t baseline_max_steps = 10000000;
  int threads = 1;
};

// Thrown for any malformed or precondition-violating config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Parses and validates, including building every (instance, eps) cell's
// parameters so that ceiling and inequality violations surface here.
ExperimentConfig parse_config(const nlohmann::json& j,
                              const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

void validate(const ExperimentConfig& config);

bool known_solver(const std::string& name);

}  // namespace iapun::bench
