#include "iapun/hard_instance.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "iapun/errors.hpp"
#include "iapun/kernels.hpp"
#include "json.hpp"

namespace iapun::hard {

namespace {

// Antiderivative of t^2 (t - 1) / (1 + t^2).
double antiderivative(double t) {
  return 0.5 * t * t - t + std::atan(t) - 0.5 * std::log1p(t * t);
}

}  // namespace

double upsilon(double x) { return 120.0 * (antiderivative(x) - antiderivative(1.0)); }

double upsilon_prime(double x) {
  const double t = x * x;
  return ((120.0 * t) * (x - 1.0)) / (1.0 + t);
}

double upsilon_second(double x) {
  const double q = 1.0 + x * x;
  return 120.0 * (x * x * x * x + 3.0 * x * x - 2.0 * x) / (q * q);
}

double upsilon_third(double x) {
  const double q = 1.0 + x * x;
  return 120.0 * (-2.0 * x * x * x + 6.0 * x * x + 6.0 * x - 2.0) / (q * q * q);
}

std::vector<double> solve_block(std::size_t n, const std::vector<double>& rhs) {
  if (n < 2 || rhs.size() != n) throw PreconditionViolation("solve_block: bad dimensions");
  const double shift = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
  // Thomas elimination; off-diagonal entries are -1.
  std::vector<double> cp(n), dp(n);
  double diag = 1.0 + shift;
  cp[0] = -1.0 / diag;
  dp[0] = rhs[0] / diag;
  for (std::size_t i = 1; i < n; ++i) {
    diag = (i + 1 == n ? 1.0 : 2.0) + shift;
    const double m = diag + cp[i - 1];
    cp[i] = -1.0 / m;
    dp[i] = (rhs[i] + dp[i - 1]) / m;
  }
  std::vector<double> s(n);
  s[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) s[i] = dp[i] - cp[i] * s[i + 1];
  return s;
}

BlockConstants block_constants(std::size_t n) {
  std::vector<double> e1(n, 0.0);
  e1[0] = 1.0;
  const std::vector<double> col = solve_block(n, e1);
  const double dn = static_cast<double>(n);
  return {col[0] / dn, col[n - 1] / dn};
}

HMaxResult h_max(double x, double z, std::size_t n, double big_c) {
  if (n < 10) throw PreconditionViolation("h_max needs n >= 10");
  std::vector<double> b(n, 0.0);
  b[0] = x;
  b[n - 1] -= z;
  const std::vector<double> s = solve_block(n, b);
  double quad = 0.0;
  for (std::size_t i = 0; i < n; ++i) quad += b[i] * s[i];
  const BlockConstants k = block_constants(n);
  return {big_c / (2.0 * static_cast<double>(n)) * quad, k.a1, k.a2};
}

const AbsConstants& estimate_abs_constants() {
  static const AbsConstants constants = [] {
    AbsConstants a;
    a.grid_points = 200001;
    const double h = (a.grid_hi - a.grid_lo) / static_cast<double>(a.grid_points - 1);
    for (std::size_t i = 0; i < a.grid_points; ++i) {
      const double x = a.grid_lo + h * static_cast<double>(i);
      a.sup_upsilon2 = std::max(a.sup_upsilon2, std::abs(upsilon_second(x)));
      a.sup_upsilon3 = std::max(a.sup_upsilon3, std::abs(upsilon_third(x)));
    }
    // |c| = |1 - a1/a2| / 2 grows with n toward its limit; sqrt(C/n) shrinks.
    std::vector<std::size_t> sizes;
    for (std::size_t n = 10; n <= 200; ++n) sizes.push_back(n);
    for (std::size_t n : {500u, 1000u, 2000u, 5000u, 10000u}) sizes.push_back(n);
    for (std::size_t n : sizes) {
      const BlockConstants k = block_constants(n);
      const double big_c = 1.0 / k.a2;
      a.sup_abs_c = std::max(a.sup_abs_c, std::abs(big_c * (k.a2 - k.a1) / 2.0));
      a.sup_coupling = std::max(a.sup_coupling, std::sqrt(big_c / static_cast<double>(n)));
    }
    // Hessian of fbar: x-block (sqrt(nu) + 2 + nu sup|Upsilon''| + 2|c|), y-block
    // ||I/n^2 + A|| <= 5, cross block sqrt(C/n).
    const double xx = 1.0 + 2.0 + a.sup_upsilon2 + 2.0 * a.sup_abs_c;
    a.ellbar1 = a.safety * (std::max(xx, 5.0) + a.sup_coupling);
    a.ellbar2 = a.safety * a.sup_upsilon3;
    return a;
  }();
  return constants;
}

void HardInstanceSpec::validate() const {
  if (t_blocks < 1) throw PreconditionViolation("hard instance needs T >= 1");
  if (n < 10) throw PreconditionViolation("hard instance needs n >= 10");
  if (!(nu > 0.0) || nu > 1.0 + 1e-12) throw PreconditionViolation("hard instance needs 0 < nu <= 1");
  if (!(lambda > 0.0) || !(scale > 0.0)) throw PreconditionViolation("bad scaling constants");
  if (a1 < kA1Low || a1 > kA1High || a2 < kA2Low || a2 > kA2High) {
    throw PreconditionViolation("a1/a2 outside their brackets");
  }
  smoothness.validate();
}

HardInstanceSpec unscaled_spec(int t_blocks, double nu, std::size_t n) {
  if (n < 10) throw PreconditionViolation("hard instance needs n >= 10");
  const AbsConstants& abs = estimate_abs_constants();
  const BlockConstants k = block_constants(n);
  HardInstanceSpec s;
  s.t_blocks = t_blocks;
  s.n = n;
  s.nu = nu;
  s.a1 = k.a1;
  s.a2 = k.a2;
  s.big_c = 1.0 / k.a2;
  s.c = s.big_c * (k.a2 - k.a1) / 2.0;
  s.ellbar1 = abs.ellbar1;
  s.ellbar2 = abs.ellbar2;
  s.provenance = abs;
  const double dn = static_cast<double>(n);
  s.smoothness = {abs.ellbar1, 1.0 / (dn * dn), nu * abs.ellbar2};
  s.validate();
  return s;
}

namespace {

class HardObjective final : public MinimaxObjective {
 public:
  explicit HardObjective(const HardInstanceSpec& s)
      : t_(static_cast<std::size_t>(s.t_blocks)),
        n_(s.n),
        nu_(s.nu),
        root_nu_(std::sqrt(s.nu)),
        k_(std::sqrt(s.big_c / static_cast<double>(s.n))),
        c_(s.c),
        shift_(1.0 / (static_cast<double>(s.n) * static_cast<double>(s.n))),
        inv_lambda_(1.0 / s.lambda),
        scale_(s.scale) {}

  double value(std::span<const double> x, std::span<const double> y) const override {
    const std::vector<double> u = rescale(x);
    const std::vector<double> v = rescale(y);
    double f = 0.5 * root_nu_ * (u[0] - 1.0) * (u[0] - 1.0);
    for (std::size_t i = 0; i < t_; ++i) {
      const double d = u[2 * i] - u[2 * i + 1];
      f += 0.5 * d * d;
    }
    double ups = 0.0;
    for (std::size_t j = 0; j < 2 * t_; ++j) ups += upsilon(u[j]);
    f += nu_ * ups;
    for (std::size_t i = 0; i < t_; ++i) {
      const double* b = v.data() + i * n_;
      double quad = shift_ * kernels::sum_squares(b, n_);
      for (std::size_t j = 0; j + 1 < n_; ++j) quad += (b[j] - b[j + 1]) * (b[j] - b[j + 1]);
      f += -0.5 * quad + k_ * (u[2 * i + 1] * b[0] - u[2 * i + 2] * b[n_ - 1]);
    }
    double sq = 0.0;
    for (std::size_t j = 1; j < u.size(); ++j) sq += u[j] * u[j];
    f += c_ * sq;
    return scale_ * f;
  }

  void grad_x(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const override {
    const std::vector<double> u = rescale(x);
    const std::vector<double> v = rescale(y);
    const std::size_t m = u.size();
    kernels::upsilon_prime(u.data(), out.data(), 2 * t_);
    for (std::size_t j = 0; j < 2 * t_; ++j) out[j] *= nu_;
    out[m - 1] = 0.0;
    out[0] += root_nu_ * (u[0] - 1.0);
    for (std::size_t i = 0; i < t_; ++i) {
      const double d = u[2 * i] - u[2 * i + 1];
      out[2 * i] += d;
      out[2 * i + 1] -= d;
      const double* b = v.data() + i * n_;
      out[2 * i + 1] += k_ * b[0];
      out[2 * i + 2] -= k_ * b[n_ - 1];
    }
    for (std::size_t j = 1; j < m; ++j) out[j] += 2.0 * c_ * u[j];
    const double g = scale_ * inv_lambda_;
    for (std::size_t j = 0; j < m; ++j) out[j] *= g;
  }

  void grad_y(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const override {
    const std::vector<double> u = rescale(x);
    const std::vector<double> v = rescale(y);
    const double g = scale_ * inv_lambda_;
    for (std::size_t i = 0; i < t_; ++i) {
      const double* b = v.data() + i * n_;
      double* o = out.data() + i * n_;
      for (std::size_t j = 0; j < n_; ++j) {
        double mv = shift_ * b[j];
        if (j > 0) mv += b[j] - b[j - 1];
        if (j + 1 < n_) mv += b[j] - b[j + 1];
        o[j] = -mv;
      }
      o[0] += k_ * u[2 * i + 1];
      o[n_ - 1] -= k_ * u[2 * i + 2];
      for (std::size_t j = 0; j < n_; ++j) o[j] *= g;
    }
  }

 private:
  std::vector<double> rescale(std::span<const double> a) const {
    std::vector<double> out(a.begin(), a.end());
    if (inv_lambda_ != 1.0) {
      for (double& v : out) v *= inv_lambda_;
    }
    return out;
  }

  std::size_t t_;
  std::size_t n_;
  double nu_;
  double root_nu_;
  double k_;
  double c_;
  double shift_;
  double inv_lambda_;
  double scale_;
};

class HardReference final : public PrimalReference {
 public:
  explicit HardReference(HardInstanceSpec s) : spec_(std::move(s)) {}
  double phi(std::span<const double> x) const override { return phi_closed_form(x, spec_); }
  void grad_phi(std::span<const double> x, std::span<double> out) const override {
    phi_closed_form(x, spec_, out);
  }

 private:
  HardInstanceSpec spec_;
};

}  // namespace

MinimaxProblem build_problem(const HardInstanceSpec& spec) {
  spec.validate();
  MinimaxProblem p;
  std::ostringstream name;
  name << (spec.scaled ? "hard_scaled" : "hard_unscaled") << "_T" << spec.t_blocks << "_n"
       << spec.n;
  p.name = name.str();
  p.dim_x = spec.dim_x();
  p.dim_y = spec.dim_y();
  p.spec = spec.smoothness;
  p.objective = std::make_shared<HardObjective>(spec);
  p.reference = std::make_shared<HardReference>(spec);
  return p;
}

MinimaxProblem build_unscaled(int t_blocks, double nu, std::size_t n) {
  return build_problem(unscaled_spec(t_blocks, nu, n));
}

double phi_closed_form(std::span<const double> x, const HardInstanceSpec& spec,
                       std::span<double> grad) {
  const std::size_t m = spec.dim_x();
  if (x.size() != m || (!grad.empty() && grad.size() != m)) {
    throw PreconditionViolation("phi_closed_form: dimension mismatch");
  }
  const double inv_l = 1.0 / spec.lambda;
  std::vector<double> u(x.begin(), x.end());
  for (double& v : u) v *= inv_l;
  const double root_nu = std::sqrt(spec.nu);
  double f = 0.5 * root_nu * (u[0] - 1.0) * (u[0] - 1.0);
  for (std::size_t j = 0; j + 1 < m; ++j) f += 0.5 * (u[j] - u[j + 1]) * (u[j] - u[j + 1]);
  for (std::size_t j = 0; j + 1 < m; ++j) f += spec.nu * upsilon(u[j]);
  if (!grad.empty()) {
    kernels::upsilon_prime(u.data(), grad.data(), m - 1);
    for (std::size_t j = 0; j + 1 < m; ++j) grad[j] *= spec.nu;
    grad[m - 1] = 0.0;
    grad[0] += root_nu * (u[0] - 1.0);
    for (std::size_t j = 0; j + 1 < m; ++j) {
      const double d = u[j] - u[j + 1];
      grad[j] += d;
      grad[j + 1] -= d;
    }
    const double g = spec.scale * inv_l;
    for (std::size_t j = 0; j < m; ++j) grad[j] *= g;
  }
  return spec.scale * f;
}

double eps_ceiling_smoothness(double ell, double l2) {
  const AbsConstants& a = estimate_abs_constants();
  const double r1 = ell / a.ellbar1;
  return 0.25 * r1 * r1 / (l2 / a.ellbar2);
}

double eps_ceiling_gap(double ell, double l2, double delta) {
  const AbsConstants& a = estimate_abs_constants();
  return 0.25 * std::pow(delta, 0.7) * std::pow(ell / a.ellbar1, -0.1) *
         std::pow(l2 / a.ellbar2, 0.4);
}

ScaledInstance scale_instance(double ell, double mu, double l2, double delta, double eps) {
  for (double v : {ell, mu, l2, delta, eps}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw PreconditionViolation("scale_instance needs positive finite inputs");
    }
  }
  if (ell < mu) throw PreconditionViolation("scale_instance needs kappa_y >= 1");
  const double ceil1 = eps_ceiling_smoothness(ell, l2);
  const double ceil2 = eps_ceiling_gap(ell, l2, delta);
  if (eps > ceil1 || eps > ceil2) {
    std::ostringstream msg;
    msg << "eps = " << eps << " exceeds the ceilings " << ceil1 << " / " << ceil2;
    throw PreconditionViolation(msg.str());
  }
  const AbsConstants& a = estimate_abs_constants();
  const double r1 = ell / a.ellbar1;
  const double r2 = l2 / a.ellbar2;
  const double lambda = std::pow(4.0 * eps / (std::pow(r1, 0.25) * std::pow(r2, 0.75)), 4.0 / 7.0);
  const double nu = l2 * a.ellbar1 * lambda / (a.ellbar2 * ell);
  if (nu > 1.0 + 1e-12) throw PreconditionViolation("scaled instance has nu > 1");
  const double kappa_y = ell / mu;
  const auto n = std::max<std::size_t>(
      10, static_cast<std::size_t>(std::floor(std::sqrt(kappa_y / a.ellbar1))));
  const double s = ell * lambda * lambda / a.ellbar1;
  const double t_real = (delta - 0.5 * std::sqrt(nu) * s) / (10.0 * nu * s);
  if (!(t_real >= 1.0)) {
    std::ostringstream msg;
    msg << "instance too small: T = floor(" << t_real << ") < 1";
    throw PreconditionViolation(msg.str());
  }
  const int t_blocks = static_cast<int>(std::floor(t_real));

  HardInstanceSpec spec = unscaled_spec(t_blocks, std::min(nu, 1.0), n);
  spec.lambda = lambda;
  spec.scale = s;
  spec.scaled = true;
  spec.target_ell = ell;
  spec.target_mu = mu;
  spec.target_l2 = l2;
  spec.target_delta = delta;
  spec.target_eps = eps;
  const double dn = static_cast<double>(n);
  spec.smoothness = {ell, r1 / (dn * dn), l2};
  spec.validate();
  return {spec, build_problem(spec)};
}

std::string coordinate_label(const HardInstanceSpec& spec, std::size_t index) {
  if (index < spec.dim_x()) return "x" + std::to_string(index + 1);
  const std::size_t k = index - spec.dim_x();
  return "y(" + std::to_string(k / spec.n + 1) + ")" + std::to_string(k % spec.n + 1);
}

std::vector<std::size_t> expected_chain_order(const HardInstanceSpec& spec) {
  std::vector<std::size_t> order;
  const std::size_t dx = spec.dim_x();
  for (std::size_t i = 0; i < static_cast<std::size_t>(spec.t_blocks); ++i) {
    order.push_back(2 * i);
    order.push_back(2 * i + 1);
    for (std::size_t j = 0; j < spec.n; ++j) order.push_back(dx + i * spec.n + j);
  }
  order.push_back(dx - 1);
  return order;
}

SupportTracker::SupportTracker(std::size_t dim_x, std::size_t dim_y)
    : dim_x_(dim_x), seen_(dim_x + dim_y, false) {}

void SupportTracker::observe(std::span<const double> x, std::span<const double> y) {
  if (x.size() != dim_x_ || x.size() + y.size() != seen_.size()) {
    throw PreconditionViolation("SupportTracker: dimension mismatch");
  }
  std::vector<std::size_t> fresh;
  for (std::size_t i = 0; i < seen_.size(); ++i) {
    const double v = i < dim_x_ ? x[i] : y[i - dim_x_];
    if (v != 0.0 && !seen_[i]) {
      seen_[i] = true;
      fresh.push_back(i);
      visited_.push_back(i);
    }
  }
  arrivals_.push_back(std::move(fresh));
}

SupportReport track_support(const HardInstanceSpec& spec, int steps, double step_x,
                            double step_y) {
  const MinimaxProblem problem = build_problem(spec);
  CountedOracle oracle(problem);
  if (step_x <= 0.0) step_x = 1.0 / problem.spec.ell;
  if (step_y <= 0.0) step_y = 1.0 / problem.spec.ell;
  DenseVector x(problem.dim_x), y(problem.dim_y), gx(problem.dim_x), gy(problem.dim_y);
  SupportTracker tracker(problem.dim_x, problem.dim_y);
  for (int s = 0; s < steps; ++s) {
    oracle.grad_x(x, y, gx);
    oracle.grad_y(x, y, gy);
    axpy(-step_x, gx, x);
    axpy(step_y, gy, y);
    tracker.observe(x, y);
  }

  SupportReport report;
  report.visited = tracker.visited();
  for (std::size_t i : report.visited) report.labels.push_back(coordinate_label(spec, i));
  const std::vector<std::size_t> order = expected_chain_order(spec);
  for (std::size_t s = 0; s < tracker.arrivals().size(); ++s) {
    if (tracker.arrivals()[s].size() > 1) {
      report.order_respected = false;
      report.violation = "step " + std::to_string(s + 1) + " added " +
                         std::to_string(tracker.arrivals()[s].size()) + " coordinates";
      return report;
    }
  }
  for (std::size_t i = 0; i < report.visited.size(); ++i) {
    if (i >= order.size() || report.visited[i] != order[i]) {
      report.order_respected = false;
      report.violation = "position " + std::to_string(i) + " is " + report.labels[i] +
                         ", expected " +
                         (i < order.size() ? coordinate_label(spec, order[i]) : "nothing");
      return report;
    }
  }
  return report;
}

std::string spec_to_json(const HardInstanceSpec& s) {
  nlohmann::ordered_json j;
  j["schema"] = "iapun.hard_instance/1";
  j["t_blocks"] = s.t_blocks;
  j["n"] = s.n;
  j["nu"] = s.nu;
  j["lambda"] = s.lambda;
  j["c"] = s.c;
  j["big_c"] = s.big_c;
  j["a1"] = s.a1;
  j["a2"] = s.a2;
  j["ellbar1"] = s.ellbar1;
  j["ellbar2"] = s.ellbar2;
  j["scale"] = s.scale;
  j["scaled"] = s.scaled;
  j["target"] = {{"ell", s.target_ell},
                 {"mu", s.target_mu},
                 {"l2", s.target_l2},
                 {"delta", s.target_delta},
                 {"eps", s.target_eps}};
  j["smoothness"] = {{"ell", s.smoothness.ell}, {"mu", s.smoothness.mu}, {"l2", s.smoothness.l2}};
  const AbsConstants& p = s.provenance;
  j["provenance"] = {{"method", "dense-grid suprema times safety factor"},
                     {"sup_upsilon2", p.sup_upsilon2},
                     {"sup_upsilon3", p.sup_upsilon3},
                     {"sup_abs_c", p.sup_abs_c},
                     {"sup_coupling", p.sup_coupling},
                     {"grid_lo", p.grid_lo},
                     {"grid_hi", p.grid_hi},
                     {"grid_points", p.grid_points},
                     {"safety", p.safety}};
  return j.dump(2);
}

HardInstanceSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionViolation(std::string("hard instance JSON: ") + e.what());
  }
  try {
    if (j.at("schema").get<std::string>() != "iapun.hard_instance/1") {
      throw PreconditionViolation("hard instance JSON: unknown schema");
    }
    HardInstanceSpec s;
    s.t_blocks = j.at("t_blocks").get<int>();
    s.n = j.at("n").get<std::size_t>();
    s.nu = j.at("nu").get<double>();
    s.lambda = j.at("lambda").get<double>();
    s.c = j.at("c").get<double>();
    s.big_c = j.at("big_c").get<double>();
    s.a1 = j.at("a1").get<double>();
    s.a2 = j.at("a2").get<double>();
    s.ellbar1 = j.at("ellbar1").get<double>();
    s.ellbar2 = j.at("ellbar2").get<double>();
    s.scale = j.at("scale").get<double>();
    s.scaled = j.at("scaled").get<bool>();
    const auto& t = j.at("target");
    s.target_ell = t.at("ell").get<double>();
    s.target_mu = t.at("mu").get<double>();
    s.target_l2 = t.at("l2").get<double>();
    s.target_delta = t.at("delta").get<double>();
    s.target_eps = t.at("eps").get<double>();
    const auto& sm = j.at("smoothness");
    s.smoothness = {sm.at("ell").get<double>(), sm.at("mu").get<double>(),
                    sm.at("l2").get<double>()};
    const auto& p = j.at("provenance");
    s.provenance.sup_upsilon2 = p.at("sup_upsilon2").get<double>();
    s.provenance.sup_upsilon3 = p.at("sup_upsilon3").get<double>();
    s.provenance.sup_abs_c = p.at("sup_abs_c").get<double>();
    s.provenance.sup_coupling = p.at("sup_coupling").get<double>();
    s.provenance.grid_lo = p.at("grid_lo").get<double>();
    s.provenance.grid_hi = p.at("grid_hi").get<double>();
    s.provenance.grid_points = p.at("grid_points").get<std::size_t>();
    s.provenance.safety = p.at("safety").get<double>();
    s.provenance.ellbar1 = s.ellbar1;
    s.provenance.ellbar2 = s.ellbar2;

    const BlockConstants k = block_constants(s.n);
    const double tol = 1e-12;
    if (std::abs(k.a1 - s.a1) > tol || std::abs(k.a2 - s.a2) > tol ||
        std::abs(1.0 / k.a2 - s.big_c) > tol * s.big_c ||
        std::abs(s.big_c * (s.a2 - s.a1) / 2.0 - s.c) > tol) {
      throw PreconditionViolation("hard instance JSON: a1/a2/C/c inconsistent with n");
    }
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionViolation(std::string("hard instance JSON: ") + e.what());
  }
}

}  // namespace iapun::hard
