#pragma once

#include <optional>
#include <string>
#include <vector>

#include "iapun/bench/config.hpp"
#include "iapun/bench/records.hpp"
#include "iapun/problem.hpp"

namespace iapun::bench {

struct BuiltInstance {
  MinimaxProblem problem;
  DenseVector p0;
};

// The instance of one config entry at one eps.
BuiltInstance build_instance(const InstanceConfig& instance, double eps,
                             const std::vector<std::uint64_t>& seeds);

// High-accuracy ||grad Phi(x)||: the closed form when available, otherwise a
// tight uncounted max oracle.
double verified_grad_norm(const MinimaxProblem& problem, const DenseVector& x);

RunRecord run_cell(const ExperimentConfig& config, const InstanceConfig& instance,
                   const std::string& solver, double eps);

// Every (instance, solver, eps) cell in declared order; writes the output
// file when config.out_path is set.
std::vector<RunRecord> run_experiment(const ExperimentConfig& config);

void write_records(const std::string& path, const std::string& format,
                   const std::vector<RunRecord>& records);

}  // namespace iapun::bench
