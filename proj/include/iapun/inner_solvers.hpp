#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "iapun/dense_vector.hpp"
#include "iapun/problem.hpp"

namespace iapun {

struct Ball {
  DenseVector center;
  double radius = 0.0;
};

// min_x max_y f(x, y) + alpha ||x - center_p||^2 + gamma ||x - center_tilde||^2,
// optionally restricted to a ball.
struct SubproblemSpec {
  DenseVector center_p;
  DenseVector center_tilde;
  double alpha = 0.0;
  double gamma = 0.0;
  std::optional<Ball> ball;

  // Throws PreconditionViolation unless gamma >= ell, alpha >= 0, dimensions
  // match and the ball radius is positive.
  void validate(const SmoothnessSpec& spec, std::size_t dim_x) const;
};

struct CertifiedSolution {
  DenseVector x;
  double suboptimality_bound = 0.0;
  OracleCounts oracle_cost;
  std::int64_t iterations = 0;
  DenseVector y;  // dual iterate (saddle solve) or the maximizer (agd_max)
};

// Iteration cap applied by agd_max for a given initial gradient norm.
std::int64_t agd_iteration_cap(double kappa, double initial_gap_bound, double target);

// Nesterov ascent on the mu-strongly concave, ell-smooth f(x_fixed, .).
// Stops at the first query point y with ||grad_y f||^2 <= 2 mu target / 4,
// which certifies max f - f(y) <= target / 4.
CertifiedSolution agd_max(CountedOracle& oracle, std::span<const double> x_fixed,
                          std::span<const double> y0, double target);

CertifiedSolution agd_max(const MinimaxProblem& problem, std::span<const double> x_fixed,
                          std::span<const double> y0, double target);

// Solves the proximal saddle subproblem to primal gap <= delta_x. Outer
// accelerated ascent on Psi(y) = min_x psi(x, y); inner projected AGD in x.
// The returned bound is the sum of the dual-side and primal-side
// certificates, each held below delta_x / 2.
CertifiedSolution saddle_prox_solve(CountedOracle& oracle, const SubproblemSpec& spec,
                                    std::span<const double> y_warm, double delta_x,
                                    std::span<const double> x_warm = {});

CertifiedSolution saddle_prox_solve(const MinimaxProblem& problem, const SubproblemSpec& spec,
                                    std::span<const double> y_warm, double delta_x);

// Euclidean projection onto the ball, in place.
void project_onto_ball(const Ball& ball, std::span<double> x);

}  // namespace iapun
