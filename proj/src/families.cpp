#include "iapun/families.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "iapun/errors.hpp"

namespace iapun::families {

namespace {

double log_cosh(double u) {
  const double a = std::abs(u);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

double sech2(double u) {
  const double c = std::cosh(u);
  return std::isfinite(c) ? 1.0 / (c * c) : 0.0;
}

// sup |2 sech^2(u) tanh(u)|
constexpr double kSechTanhSup = 0.76980035891950105;

}  // namespace

double CoordinateTerm::value(double t) const {
  double v = 0.5 * h * t * t + g * t;
  if (ripple != 0.0) v += ripple * ripple_width * ripple_width * std::cos(t / ripple_width);
  if (ramp != 0.0) v += ramp * ramp_width * log_cosh(t / ramp_width);
  return v;
}

double CoordinateTerm::d1(double t) const {
  double v = h * t + g;
  if (ripple != 0.0) v -= ripple * ripple_width * std::sin(t / ripple_width);
  if (ramp != 0.0) v += ramp * std::tanh(t / ramp_width);
  return v;
}

double CoordinateTerm::d2(double t) const {
  double v = h;
  if (ripple != 0.0) v -= ripple * std::cos(t / ripple_width);
  if (ramp != 0.0) v += ramp / ramp_width * sech2(t / ramp_width);
  return v;
}

double CoordinateTerm::d3(double t) const {
  double v = 0.0;
  if (ripple != 0.0) v += ripple / ripple_width * std::sin(t / ripple_width);
  if (ramp != 0.0) {
    const double u = t / ramp_width;
    v -= 2.0 * ramp / (ramp_width * ramp_width) * sech2(u) * std::tanh(u);
  }
  return v;
}

double CoordinateTerm::sup_abs_d2() const {
  return std::abs(h) + std::abs(ripple) + std::abs(ramp) / ramp_width;
}

double CoordinateTerm::sup_abs_d3() const {
  return std::abs(ripple) / ripple_width +
         kSechTanhSup * std::abs(ramp) / (ramp_width * ramp_width);
}

void CoupledQuadraticSpec::validate() const {
  if (terms.empty()) throw PreconditionViolation(name + ": no coordinates");
  if (b.size() != terms.size()) throw PreconditionViolation(name + ": b has the wrong size");
  if (dim_y < terms.size()) throw PreconditionViolation(name + ": dim_y must be >= dim_x");
  if (!(mu > 0.0)) throw PreconditionViolation(name + ": mu must be positive");
  for (const CoordinateTerm& t : terms) {
    if (!(t.ripple_width > 0.0) || !(t.ramp_width > 0.0)) {
      throw PreconditionViolation(name + ": term widths must be positive");
    }
  }
}

SmoothnessSpec smoothness(const CoupledQuadraticSpec& spec) {
  spec.validate();
  double q2 = 0.0, q3 = 0.0, bmax = 0.0;
  for (const CoordinateTerm& t : spec.terms) {
    q2 = std::max(q2, t.sup_abs_d2());
    q3 = std::max(q3, t.sup_abs_d3());
  }
  for (double v : spec.b) bmax = std::max(bmax, std::abs(v));
  SmoothnessSpec s;
  s.mu = spec.mu;
  s.ell = std::max(q2, spec.mu) + bmax;
  s.l2 = q3;
  if (spec.declared_ell > 0.0) {
    if (spec.declared_ell < s.ell) {
      throw PreconditionViolation(spec.name + ": declared ell below the computed bound");
    }
    s.ell = spec.declared_ell;
  }
  if (spec.declared_l2 > 0.0) {
    if (spec.declared_l2 < s.l2) {
      throw PreconditionViolation(spec.name + ": declared L2 below the computed bound");
    }
    s.l2 = spec.declared_l2;
  }
  if (!(s.l2 > 0.0)) throw PreconditionViolation(spec.name + ": L2 is zero; declare one");
  return s;
}

std::vector<double> coupling_rows(const CoupledQuadraticSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.dim_x());
  const auto m = static_cast<Eigen::Index>(spec.dim_y);
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd g(m, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = unif(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, n);
  std::vector<double> rows(static_cast<std::size_t>(n * m));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) rows[static_cast<std::size_t>(i * m + j)] = q(j, i);
  }
  return rows;
}

namespace {

class CoupledObjective final : public MinimaxObjective {
 public:
  explicit CoupledObjective(const CoupledQuadraticSpec& spec)
      : terms_(spec.terms), n_(spec.dim_x()), m_(spec.dim_y), mu_(spec.mu) {
    const std::vector<double> q = coupling_rows(spec);
    bmat_.resize(n_ * m_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = 0; j < m_; ++j) bmat_[i * m_ + j] = spec.b[i] * q[i * m_ + j];
    }
  }

  double value(std::span<const double> x, std::span<const double> y) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < n_; ++i) v += terms_[i].value(x[i]);
    for (std::size_t i = 0; i < n_; ++i) v += x[i] * dot(row(i), y);
    return v - 0.5 * mu_ * norm_squared(y);
  }

  void grad_x(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const override {
    for (std::size_t i = 0; i < n_; ++i) out[i] = terms_[i].d1(x[i]) + dot(row(i), y);
  }

  void grad_y(std::span<const double> x, std::span<const double> y,
              std::span<double> out) const override {
    for (std::size_t j = 0; j < m_; ++j) out[j] = -mu_ * y[j];
    for (std::size_t i = 0; i < n_; ++i) axpy(x[i], row(i), out);
  }

 private:
  std::span<const double> row(std::size_t i) const { return {bmat_.data() + i * m_, m_}; }

  std::vector<CoordinateTerm> terms_;
  std::size_t n_;
  std::size_t m_;
  double mu_;
  std::vector<double> bmat_;
};

class CoupledReference final : public PrimalReference {
 public:
  explicit CoupledReference(CoupledQuadraticSpec spec) : spec_(std::move(spec)) {}
  double phi(std::span<const double> x) const override { return families::phi(spec_, x); }
  void grad_phi(std::span<const double> x, std::span<double> out) const override {
    families::phi(spec_, x, out);
  }

 private:
  CoupledQuadraticSpec spec_;
};

}  // namespace

MinimaxProblem build(const CoupledQuadraticSpec& spec) {
  MinimaxProblem p;
  p.name = spec.name;
  p.dim_x = spec.dim_x();
  p.dim_y = spec.dim_y;
  p.spec = smoothness(spec);
  p.objective = std::make_shared<CoupledObjective>(spec);
  p.reference = std::make_shared<CoupledReference>(spec);
  return p;
}

double phi(const CoupledQuadraticSpec& spec, std::span<const double> x, std::span<double> grad) {
  if (x.size() != spec.dim_x() || (!grad.empty() && grad.size() != spec.dim_x())) {
    throw PreconditionViolation(spec.name + ": dimension mismatch in phi");
  }
  double v = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double k = spec.b[i] * spec.b[i] / spec.mu;
    v += spec.terms[i].value(x[i]) + 0.5 * k * x[i] * x[i];
    if (!grad.empty()) grad[i] = spec.terms[i].d1(x[i]) + k * x[i];
  }
  return v;
}

namespace {

struct Scalar1D {
  CoordinateTerm term;
  double k;
  double value(double t) const { return term.value(t) + 0.5 * k * t * t; }
  double d1(double t) const { return term.d1(t) + k * t; }
};

double minimize_1d(const Scalar1D& f) {
  const CoordinateTerm& t = f.term;
  const double curv = t.h + f.k;
  const double wiggle = std::abs(t.ripple) * t.ripple_width + std::abs(t.g);
  if (curv < 0.0 || (curv == 0.0 && std::abs(t.ramp) <= wiggle)) {
    throw PreconditionViolation("phi_star: Phi is unbounded below");
  }
  // Beyond R every term except the bounded ripple pushes the derivative
  // away from zero.
  double r = std::max(1e-3, t.ramp_width);
  while (curv * r + std::abs(t.ramp) * std::tanh(r / t.ramp_width) <= wiggle) r *= 2.0;
  r *= 1.01;
  const double width = std::min(t.ripple != 0.0 ? t.ripple_width : r, t.ramp_width);
  const auto points = static_cast<std::size_t>(
      std::clamp(2.0 * r / (width / 16.0), 4001.0, 4.0e6));
  const double hstep = 2.0 * r / static_cast<double>(points - 1);
  std::size_t best = 0;
  double best_v = f.value(-r);
  for (std::size_t i = 1; i < points; ++i) {
    const double v = f.value(-r + hstep * static_cast<double>(i));
    if (v < best_v) {
      best_v = v;
      best = i;
    }
  }
  double lo = -r + hstep * static_cast<double>(best > 0 ? best - 1 : 0);
  double hi = -r + hstep * static_cast<double>(std::min(best + 1, points - 1));
  if (f.d1(lo) < 0.0 && f.d1(hi) > 0.0) {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      (f.d1(mid) < 0.0 ? lo : hi) = mid;
    }
    const double cand = 0.5 * (lo + hi);
    return f.value(cand) <= best_v ? cand : -r + hstep * static_cast<double>(best);
  }
  return -r + hstep * static_cast<double>(best);
}

}  // namespace

Minimum phi_star(const CoupledQuadraticSpec& spec) {
  spec.validate();
  Minimum out;
  out.x = DenseVector(spec.dim_x());
  for (std::size_t i = 0; i < spec.dim_x(); ++i) {
    const Scalar1D f{spec.terms[i], spec.b[i] * spec.b[i] / spec.mu};
    out.x[i] = minimize_1d(f);
  }
  out.value = phi(spec, out.x);
  return out;
}

CoupledQuadraticSpec random_instance(std::uint64_t seed, const RandomOptions& o) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  CoupledQuadraticSpec s;
  std::ostringstream name;
  name << (o.convex ? "cq_convex_" : "cq_ripple_") << seed;
  s.name = name.str();
  s.dim_y = o.dim_y;
  s.mu = o.mu;
  s.seed = seed;
  for (std::size_t i = 0; i < o.dim_x; ++i) {
    const double bi = o.coupling * (0.5 + 0.5 * unit(rng));
    const double curv = o.curvature * (0.5 + 0.5 * unit(rng));
    CoordinateTerm t;
    t.h = curv - bi * bi / o.mu;
    t.g = (2.0 * unit(rng) - 1.0) * curv * 0.25;
    if (!o.convex) {
      t.ripple = o.ripple * curv;
      t.ripple_width = o.ripple_width * (0.75 + 0.5 * unit(rng));
    }
    s.terms.push_back(t);
    s.b.push_back(bi);
  }
  if (o.convex) s.declared_l2 = 1.0;
  return s;
}

RampInstance ramp_instance(const RampOptions& o, double eps) {
  if (!(eps > 0.0) || eps > o.eps_max) {
    throw PreconditionViolation("ramp_instance: eps must lie in (0, eps_max]");
  }
  const double ell = o.ell;
  const double mu = ell / o.kappa_y;
  const double l2 = o.rho * ell * ell / o.eps_max;
  const double alpha = std::sqrt(l2 * eps);

  // Ripple: curvature ripple_alpha * alpha, Hessian-Lipschitz share L2 / 2.
  const double beta = o.ripple_alpha * alpha;
  const double w = 2.0 * beta / l2;
  const double slope = beta * w + o.slope_margin * eps;
  // Ramp bottom: curvature at most ell / 5, Hessian-Lipschitz share L2 / 2.
  const double wr = std::max(slope / (0.2 * ell), std::sqrt(2.0 * kSechTanhSup * slope / l2));

  const double b_ramp = o.coupling * ell;
  const double b_bowl = 0.1 * ell;
  const double bowl_curv = 0.2 * ell;

  CoupledQuadraticSpec s;
  std::ostringstream name;
  name << "ramp_eps" << eps;
  s.name = name.str();
  s.dim_y = 2;
  s.mu = mu;
  s.seed = 7;
  CoordinateTerm ramp;
  ramp.h = -b_ramp * b_ramp / mu;
  ramp.ripple = beta;
  ramp.ripple_width = w;
  ramp.ramp = slope;
  ramp.ramp_width = wr;
  CoordinateTerm bowl;
  bowl.h = bowl_curv - b_bowl * b_bowl / mu;
  s.terms = {ramp, bowl};
  s.b = {b_ramp, b_bowl};
  s.declared_ell = ell;
  s.declared_l2 = l2;

  RampInstance out;
  out.spec = s;
  const double length = o.delta / slope;
  out.p0 = DenseVector{length, std::sqrt(0.1 * o.delta / bowl_curv)};
  return out;
}

}  // namespace iapun::families
