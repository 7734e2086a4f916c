#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iapun/dense_vector.hpp"
#include "iapun/problem.hpp"

namespace iapun::families {

// Scalar term q(t) = h t^2 / 2 + g t + ripple w^2 cos(t / w)
//                    + ramp wr log cosh(t / wr).
struct CoordinateTerm {
  double h = 0.0;
  double g = 0.0;
  double ripple = 0.0;
  double ripple_width = 1.0;
  double ramp = 0.0;
  double ramp_width = 1.0;

  double value(double t) const;
  double d1(double t) const;
  double d2(double t) const;
  double d3(double t) const;
  double sup_abs_d2() const;  // upper bound on |q''|
  double sup_abs_d3() const;  // upper bound on |q'''|
};

// f(x, y) = sum_i q_i(x_i) + x^T B y - (mu / 2) ||y||^2 with B = diag(b) Q and
// Q a seeded matrix with orthonormal rows, so B B^T = diag(b^2) and
// Phi(x) = sum_i q_i(x_i) + b_i^2 x_i^2 / (2 mu) is separable.
struct CoupledQuadraticSpec {
  std::string name = "coupled_quadratic";
  std::vector<CoordinateTerm> terms;
  std::vector<double> b;
  std::size_t dim_y = 0;
  double mu = 1.0;
  std::uint64_t seed = 0;
  // Declared constants; zero selects the computed bounds. Declared values
  // must not be below the computed ones.
  double declared_ell = 0.0;
  double declared_l2 = 0.0;

  std::size_t dim_x() const { return terms.size(); }
  void validate() const;
};

// ell = max(max_i sup|q_i''|, mu) + max_i b_i, L2 = max_i sup|Phi_i'''|.
SmoothnessSpec smoothness(const CoupledQuadraticSpec& spec);

// Row-orthonormal Q (dim_x by dim_y, row-major) for the spec's seed.
std::vector<double> coupling_rows(const CoupledQuadraticSpec& spec);

MinimaxProblem build(const CoupledQuadraticSpec& spec);

double phi(const CoupledQuadraticSpec& spec, std::span<const double> x,
           std::span<double> grad = {});

struct Minimum {
  double value = 0.0;
  DenseVector x;
};

// Global minimum of Phi by per-coordinate bracketing, dense grid and
// bisection on the derivative. Throws PreconditionViolation if Phi is
// unbounded below.
Minimum phi_star(const CoupledQuadraticSpec& spec);

// Random instance with dim_x nonconvex ripple coordinates.
struct RandomOptions {
  std::size_t dim_x = 4;
  std::size_t dim_y = 8;
  double mu = 0.2;
  double coupling = 0.5;    // b_i drawn from [coupling / 2, coupling]
  double curvature = 0.5;   // effective curvature of Phi_i drawn from [curvature / 2, curvature]
  double ripple = 0.0;      // ripple strength relative to the effective curvature
  double ripple_width = 0.05;
  bool convex = false;      // no ripple, Phi strongly convex
};

CoupledQuadraticSpec random_instance(std::uint64_t seed, const RandomOptions& options);

// Rippled ramp: Phi descends a ramp of slope proportional to eps for a total
// drop of about delta, with a ripple whose curvature is a fixed multiple of
// alpha = sqrt(L2 eps), plus a coupled bowl coordinate. The instance depends
// on eps; ell, mu and L2 do not.
struct RampOptions {
  double ell = 500.0;
  double kappa_y = 4.0;
  double rho = 1.0;          // L2 = rho ell^2 / eps_max
  double eps_max = 0.1;
  double delta = 2.5e-3;     // Phi(p0) - Phi* up to the bowl and ripple terms
  double ripple_alpha = 0.5; // ripple curvature / alpha
  double slope_margin = 2.0; // ramp slope = ripple gradient + slope_margin * eps
  double coupling = 0.002;   // ramp-coordinate coupling / ell
};

struct RampInstance {
  CoupledQuadraticSpec spec;
  DenseVector p0;
};

RampInstance ramp_instance(const RampOptions& options, double eps);

}  // namespace iapun::families
