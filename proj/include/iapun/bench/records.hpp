#pragma once

#include <string>
#include <vector>

#include "iapun/problem.hpp"

namespace iapun::bench {

struct EpochRow {
  int epoch = 0;
  int t_k = 0;
  std::string flag;
  std::string branch;
  double descent = 0.0;
  OracleCounts cumulative;

  bool operator==(const EpochRow& o) const;
};

struct RunRecord {
  std::string solver;
  std::string instance;
  double eps = 0.0;
  std::string status;  // "success" or "failed"
  std::string message;
  OracleCounts totals;
  int epochs = 0;
  double final_grad_norm = 0.0;  // high-accuracy ||grad Phi|| at the output
  double wall_time_s = 0.0;
  std::vector<EpochRow> rows;

  bool success() const { return status == "success"; }
  bool operator==(const RunRecord& o) const;  // NaN fields compare equal to NaN
};

// Column order of the CSV writer. One line per epoch row; a record without
// rows gets one line with the per-epoch columns empty.
const std::vector<std::string>& csv_columns();

std::string to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(const std::string& text);

std::string to_json(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_json(const std::string& text);

// The CSV with the wall_time_s column removed, for determinism checks.
std::string strip_wall_time(const std::string& csv);

// Least-squares slope of log(total gradient calls) against log(1 / eps) over
// successful records of one solver. instance may be empty when the solver
// has records for a single instance. Requires three or more points.
double slope_fit(const std::vector<RunRecord>& records, const std::string& solver,
                 const std::string& instance = {});

}  // namespace iapun::bench
