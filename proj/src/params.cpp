#include "iapun/params.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "iapun/errors.hpp"

namespace iapun {

double IapunParams::candidate_threshold() const { return alpha * alpha * alpha / (32.0 * l2 * l2); }

double IapunParams::epoch_descent() const {
  return std::min(eps * eps / (50.0 * alpha), alpha * alpha * alpha / (72.0 * l2 * l2));
}

double IapunParams::ball_radius() const { return alpha / (4.0 * l2); }

double IapunParams::eta() const { return alpha / l2; }

double IapunParams::solve_radius() const { return std::sqrt(2.0 * delta_x / (gamma + 2.0 * alpha)); }

double chi_value(double kappa_x, double delta_x, double ell, double l1, double alpha,
                 double gamma, double d) {
  const double r = std::sqrt(2.0 * delta_x / (gamma + 2.0 * alpha));
  return 6.0 * std::sqrt(kappa_x) * (11.0 * kappa_x * delta_x + (2.0 * ell + l1 + alpha) * r * d);
}

std::vector<InequalityCheck> parameter_inequalities(const IapunParams& p) {
  const double a3 = p.alpha * p.alpha * p.alpha;
  const double l22 = p.l2 * p.l2;
  const double e2 = p.eps * p.eps;
  const double r = p.solve_radius();
  return {
      {"chi + dx + dy <= eps^2/(3200 gamma)", p.chi + p.delta_x + p.delta_y,
       e2 / (3200.0 * p.gamma)},
      {"chi + dx + 4dy <= alpha^3/(32 L2^2)", p.chi + p.delta_x + 4.0 * p.delta_y,
       a3 / (32.0 * l22)},
      {"chi + dx + 4dy <= eps^2/(50 alpha)", p.chi + p.delta_x + 4.0 * p.delta_y,
       e2 / (50.0 * p.alpha)},
      {"chi + dx + 8dy <= alpha^3/(72 L2^2)", p.chi + p.delta_x + 8.0 * p.delta_y,
       a3 / (72.0 * l22)},
      {"chi + 4dy <= alpha^3/(72 L2^2)", p.chi + 4.0 * p.delta_y, a3 / (72.0 * l22)},
      {"2dy <= dx", 2.0 * p.delta_y, p.delta_x},
      {"Dy <= eps/4", p.big_delta_y, p.eps / 4.0},
      {"2Dy/ell <= sqrt(2dx/(gamma+2alpha))", 2.0 * p.big_delta_y / p.ell, r},
      {"sqrt(2dx/(gamma+2alpha)) <= eps/(20(L1+2gamma))", r,
       p.eps / (20.0 * (p.l1 + 2.0 * p.gamma))},
      {"sqrt(2dx/(gamma+2alpha)) <= alpha/(24 L2)", r, p.alpha / (24.0 * p.l2)},
  };
}

const char* to_string(ParamPolicy policy) {
  return policy == ParamPolicy::theory ? "theory" : "practical";
}

ParamPolicy policy_from_string(const std::string& name) {
  if (name == "theory") return ParamPolicy::theory;
  if (name == "practical") return ParamPolicy::practical;
  throw PreconditionViolation("unknown parameter policy '" + name + "'");
}

IapunParams derive_params(const SmoothnessSpec& spec, double eps, ParamPolicy policy) {
  spec.validate();
  if (!(eps > 0.0) || !std::isfinite(eps)) throw PreconditionViolation("eps must be positive");
  const double ceiling = spec.ell * spec.ell / spec.l2;
  if (eps > ceiling) {
    std::ostringstream msg;
    msg << "eps = " << eps << " exceeds ell^2/L2 = " << ceiling;
    throw PreconditionViolation(msg.str());
  }

  IapunParams p;
  p.policy = policy;
  p.eps = eps;
  p.ell = spec.ell;
  p.l1 = spec.l1();
  p.l2 = spec.l2;
  p.kappa_y = spec.kappa_y();
  p.alpha = std::sqrt(spec.l2 * eps);
  p.gamma = spec.ell;
  p.kappa_x = p.gamma / p.alpha;
  const double sk = std::sqrt(p.kappa_x);
  p.omega = (2.0 * sk - 1.0) / (2.0 * sk + 1.0);
  p.d = p.alpha / spec.l2;

  const double ky = p.kappa_y;
  const double ell = spec.ell;
  const double e2 = eps * eps;
  const double dx_units = e2 / (1e6 * std::pow(p.kappa_x, 1.5) * ell);
  const double dy_units = eps / (3e3 * std::pow(p.kappa_x, 0.75));
  if (policy == ParamPolicy::theory) {
    p.delta_x = std::min(spec.l2 * spec.l2 * e2 * e2 / (1e10 * ky * ky * ell * ell), dx_units);
    p.big_delta_y = std::min(spec.l2 * e2 / (4e5 * ky * std::sqrt(ell)), dy_units);
  } else {
    p.delta_x = dx_units;
    p.big_delta_y = dy_units;
  }
  p.delta_y = p.delta_x / 2.0;
  p.chi = chi_value(p.kappa_x, p.delta_x, ell, p.l1, p.alpha, p.gamma, p.d);

  for (const double v : {p.alpha, p.gamma, p.kappa_x, p.omega, p.d, p.chi, p.delta_x, p.delta_y,
                         p.big_delta_y}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConstructionError("positivity", "a derived parameter is not positive and finite");
    }
  }
  for (const InequalityCheck& c : parameter_inequalities(p)) {
    const bool asserted = policy == ParamPolicy::theory || c.name == "2dy <= dx" ||
                          c.name == "Dy <= eps/4";
    if (asserted && !c.holds()) {
      std::ostringstream msg;
      msg << "lhs = " << c.lhs << ", rhs = " << c.rhs;
      throw ConstructionError(c.name, msg.str());
    }
  }
  return p;
}

void check_precision_floor(const IapunParams& params, double value_scale) {
  const double floor = kPrecisionFloorFactor * std::numeric_limits<double>::epsilon() *
                       std::abs(value_scale);
  if (params.delta_x < floor) {
    std::ostringstream msg;
    msg << "delta_x = " << params.delta_x << " is below the precision floor " << floor
        << " for function scale " << value_scale;
    throw PreconditionViolation(msg.str());
  }
}

}  // namespace iapun
