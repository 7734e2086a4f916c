#pragma once

#include <string>
#include <vector>

#include "iapun/problem.hpp"

namespace iapun {

// theory: the closed-form schedule, every inequality asserted.
// practical: only the unit-consistent branch of each tolerance minimum, i.e.
// delta_x = eps^2 / (1e6 kappa_x^1.5 ell) and Delta_y = eps / (3e3 kappa_x^0.75);
// the inequalities are evaluated but only 2 delta_y <= delta_x and
// Delta_y <= eps / 4 are asserted, which keeps the stopping certificate.
enum class ParamPolicy { theory, practical };

const char* to_string(ParamPolicy policy);
ParamPolicy policy_from_string(const std::string& name);

struct IapunParams {
  ParamPolicy policy = ParamPolicy::theory;
  double eps = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  double kappa_x = 0.0;
  double omega = 0.0;
  double d = 0.0;
  double chi = 0.0;
  double delta_x = 0.0;
  double delta_y = 0.0;
  double big_delta_y = 0.0;
  // Copied from the spec the parameters were derived for.
  double ell = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double kappa_y = 0.0;

  // alpha^3 / (32 L2^2): sufficient-descent threshold of the candidate scan.
  double candidate_threshold() const;
  // min{eps^2 / (50 alpha), alpha^3 / (72 L2^2)}: guaranteed per-epoch descent.
  double epoch_descent() const;
  // alpha / (4 L2): radius of the recompute ball.
  double ball_radius() const;
  // alpha / L2: negative-curvature step length.
  double eta() const;
  // sqrt(2 delta_x / (gamma + 2 alpha)): distance implied by a delta_x solve.
  double solve_radius() const;
};

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds() const { return lhs <= rhs; }
};

// chi for the given tolerances and constants.
double chi_value(double kappa_x, double delta_x, double ell, double l1, double alpha,
                 double gamma, double d);

// Evaluates the ten inequalities the analysis needs, in a fixed order.
std::vector<InequalityCheck> parameter_inequalities(const IapunParams& p);

// Tolerances of the standard schedule: alpha = sqrt(L2 eps), gamma = ell.
// Throws PreconditionViolation if eps > ell^2 / L2 and ConstructionError
// naming the first inequality that fails.
IapunParams derive_params(const SmoothnessSpec& spec, double eps,
                          ParamPolicy policy = ParamPolicy::theory);

// Smallest delta_x, relative to the function scale, that the solver accepts.
inline constexpr double kPrecisionFloorFactor = 100.0;

// Throws PreconditionViolation if delta_x < kPrecisionFloorFactor * machine
// epsilon * |value_scale|. Called at the start of a run with the
// value scale |phi(p0)|.
void check_precision_floor(const IapunParams& params, double value_scale);

}  // namespace iapun
