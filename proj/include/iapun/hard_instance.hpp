#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "iapun/dense_vector.hpp"
#include "iapun/problem.hpp"

namespace iapun::hard {

// Upsilon(x) = 120 * integral_1^x t^2 (t - 1) / (1 + t^2) dt and its derivatives.
double upsilon(double x);
double upsilon_prime(double x);
double upsilon_second(double x);
double upsilon_third(double x);

// M = I / n^2 + A with A the path-graph Laplacian. Solves M s = rhs in O(n).
std::vector<double> solve_block(std::size_t n, const std::vector<double>& rhs);

struct BlockConstants {
  double a1 = 0.0;  // (M^-1)_{11} / n
  double a2 = 0.0;  // (M^-1)_{1n} / n
};

BlockConstants block_constants(std::size_t n);

struct HMaxResult {
  double value = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
};

// max_y h(x, z; y) = (C / 2n) b^T M^-1 b with b = x e_1 - z e_n.
HMaxResult h_max(double x, double z, std::size_t n, double big_c);

// Brackets that the numerically extracted constants must fall in.
inline constexpr double kA1Low = 1.2, kA1High = 1.35;
inline constexpr double kA2Low = 0.84, kA2High = 0.86;

struct AbsConstants {
  double ellbar1 = 0.0;
  double ellbar2 = 0.0;
  // Provenance of the estimate.
  double sup_upsilon2 = 0.0;  // sup |Upsilon''| on the grid
  double sup_upsilon3 = 0.0;  // sup |Upsilon'''| on the grid
  double sup_abs_c = 0.0;     // sup |c| over n >= 10
  double sup_coupling = 0.0;  // sup sqrt(C / n) over n >= 10
  double grid_lo = -10.0;
  double grid_hi = 10.0;
  std::size_t grid_points = 0;
  double safety = 2.0;
};

// Smoothness constants of the unscaled family, by dense-grid suprema with a
// safety factor of 2. Computed once and cached.
const AbsConstants& estimate_abs_constants();

struct HardInstanceSpec {
  int t_blocks = 1;
  std::size_t n = 10;
  double nu = 1.0;
  double lambda = 1.0;
  double c = 0.0;
  double big_c = 0.0;
  double a1 = 0.0;
  double a2 = 0.0;
  double ellbar1 = 0.0;
  double ellbar2 = 0.0;
  // f = scale * fbar(x / lambda; y / lambda); scale = 1, lambda = 1 when unscaled.
  double scale = 1.0;
  bool scaled = false;
  // Requested targets (ell, mu, L2, Delta, eps); zero when unscaled.
  double target_ell = 0.0;
  double target_mu = 0.0;
  double target_l2 = 0.0;
  double target_delta = 0.0;
  double target_eps = 0.0;
  // Constants the built problem reports.
  SmoothnessSpec smoothness;
  AbsConstants provenance;

  std::size_t dim_x() const { return 2 * static_cast<std::size_t>(t_blocks) + 1; }
  std::size_t dim_y() const { return static_cast<std::size_t>(t_blocks) * n; }
  void validate() const;
};

// Unscaled spec for (T, nu, n) with a1, a2, C, c extracted from h_max.
HardInstanceSpec unscaled_spec(int t_blocks, double nu, std::size_t n);

// Problem for any spec, with phi_closed_form as its reference surface.
MinimaxProblem build_problem(const HardInstanceSpec& spec);

MinimaxProblem build_unscaled(int t_blocks, double nu, std::size_t n);

// The maximized-out chain function and its gradient, in the spec's scaling:
// sqrt(nu)/2 (x1 - 1)^2 + 1/2 sum_{i<=2T} (x_i - x_{i+1})^2 + nu sum_{i<=2T} Upsilon(x_i).
double phi_closed_form(std::span<const double> x, const HardInstanceSpec& spec,
                       std::span<double> grad = {});

struct ScaledInstance {
  HardInstanceSpec spec;
  MinimaxProblem problem;
};

// The two ceilings on eps for given (ell, L2, Delta).
double eps_ceiling_smoothness(double ell, double l2);
double eps_ceiling_gap(double ell, double l2, double delta);

ScaledInstance scale_instance(double ell, double mu, double l2, double delta, double eps);

// Labels and chain order of coordinates: x first (x1..x_{2T+1}), then y
// blocks y(1)1..y(1)n, y(2)1, ...
std::string coordinate_label(const HardInstanceSpec& spec, std::size_t index);
std::vector<std::size_t> expected_chain_order(const HardInstanceSpec& spec);

// Coordinates in order of first appearance in the support of any observed
// point or gradient.
class SupportTracker {
 public:
  SupportTracker(std::size_t dim_x, std::size_t dim_y);
  void observe(std::span<const double> x, std::span<const double> y);
  const std::vector<std::size_t>& visited() const { return visited_; }
  // Indices that entered together at each observation.
  const std::vector<std::vector<std::size_t>>& arrivals() const { return arrivals_; }

 private:
  std::size_t dim_x_ = 0;
  std::vector<bool> seen_;
  std::vector<std::size_t> visited_;
  std::vector<std::vector<std::size_t>> arrivals_;
};

struct SupportReport {
  std::vector<std::size_t> visited;
  std::vector<std::string> labels;
  bool order_respected = true;  // visited is a prefix of the chain order, one per step
  std::string violation;        // first violation, empty when respected
};

// Exact-gradient simultaneous descent-ascent from the origin for `steps`
// steps, tracking iterate supports, then compared with the chain order.
SupportReport track_support(const HardInstanceSpec& spec, int steps, double step_x = 0.0,
                            double step_y = 0.0);

}  // namespace iapun::hard

namespace iapun::hard {

// JSON form of a spec: every HardInstanceSpec field plus the provenance of
// ellbar1 and ellbar2. Parsing checks a1, a2, C, c against a fresh
// extraction for n and throws PreconditionViolation on mismatch.
std::string spec_to_json(const HardInstanceSpec& spec);
HardInstanceSpec spec_from_json(const std::string& text);

}  // namespace iapun::hard
