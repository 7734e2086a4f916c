#include <gtest/gtest.h>

#include <cmath>

#include "iapun/errors.hpp"
#include "iapun/params.hpp"

using namespace iapun;

TEST(DeriveParams, DirectSubstitution) {
  const IapunParams p = derive_params({1.0, 1.0, 1.0}, 0.01);
  EXPECT_DOUBLE_EQ(p.alpha, 0.1);
  EXPECT_DOUBLE_EQ(p.gamma, 1.0);
  EXPECT_DOUBLE_EQ(p.kappa_x, 10.0);
  const double s = std::sqrt(10.0);
  EXPECT_DOUBLE_EQ(p.omega, (2.0 * s - 1.0) / (2.0 * s + 1.0));
  EXPECT_DOUBLE_EQ(p.d, 0.1);
  EXPECT_DOUBLE_EQ(p.l1, 2.0);
}

TEST(DeriveParams, ToleranceScheduleAndAllInequalities) {
  const SmoothnessSpec spec{1.0, 0.1, 1.0};
  const double eps = 0.01;
  const IapunParams p = derive_params(spec, eps);
  // Both branches evaluated by hand: kappa_y = 10, kappa_x = 10.
  const double branch1 = 1.0 * std::pow(eps, 4) / (1e10 * 100.0);
  const double branch2 = eps * eps / (1e6 * std::pow(10.0, 1.5));
  EXPECT_DOUBLE_EQ(p.delta_x, std::min(branch1, branch2));
  EXPECT_DOUBLE_EQ(p.delta_y, p.delta_x / 2.0);
  const double dy1 = eps * eps / (4e5 * 10.0);
  const double dy2 = eps / (3e3 * std::pow(10.0, 0.75));
  EXPECT_DOUBLE_EQ(p.big_delta_y, std::min(dy1, dy2));
  const double r = std::sqrt(2.0 * p.delta_x / (1.0 + 0.2));
  const double chi = 6.0 * std::sqrt(10.0) * (110.0 * p.delta_x + (2.0 + 11.0 + 0.1) * r * 0.1);
  EXPECT_NEAR(p.chi, chi, 1e-12 * chi);

  const std::vector<InequalityCheck> checks = parameter_inequalities(p);
  ASSERT_EQ(checks.size(), 10u);
  for (const InequalityCheck& c : checks) EXPECT_TRUE(c.holds()) << c.name;
}

TEST(DeriveParams, EpsAboveTheSmoothnessCeilingIsRejected) {
  EXPECT_THROW(derive_params({1.0, 0.5, 1.0}, 2.0), PreconditionViolation);
  EXPECT_THROW(derive_params({1.0, 0.5, 1.0}, 0.0), PreconditionViolation);
  EXPECT_THROW(derive_params({1.0, 0.5, 1.0}, -1e-3), PreconditionViolation);
  EXPECT_NO_THROW(derive_params({1.0, 0.5, 1.0}, 1.0));
}

TEST(DeriveParams, TheoryScheduleNamesTheFailingInequality) {
  // ell = L2 = mu = 100 at eps = 100: alpha = ell and the second delta_x
  // branch binds, which leaves chi too large for the first inequality.
  const SmoothnessSpec spec{100.0, 100.0, 100.0};
  try {
    derive_params(spec, 100.0);
    FAIL() << "expected a construction error";
  } catch (const ConstructionError& e) {
    EXPECT_EQ(e.inequality(), "chi + dx + dy <= eps^2/(3200 gamma)");
  }
}

TEST(DeriveParams, PracticalPolicyUsesTheUnitConsistentBranch) {
  const SmoothnessSpec spec{100.0, 100.0, 100.0};
  const double eps = 100.0;
  const IapunParams p = derive_params(spec, eps, ParamPolicy::practical);
  EXPECT_EQ(p.policy, ParamPolicy::practical);
  EXPECT_DOUBLE_EQ(p.kappa_x, 1.0);
  EXPECT_DOUBLE_EQ(p.delta_x, eps * eps / (1e6 * 100.0));
  EXPECT_DOUBLE_EQ(p.big_delta_y, eps / 3e3);
  EXPECT_LE(2.0 * p.delta_y, p.delta_x);
  EXPECT_LE(p.big_delta_y, eps / 4.0);
}

TEST(DeriveParams, FieldsArePositiveAcrossAGrid) {
  for (double ell : {0.5, 1.0, 3.0}) {
    for (double kappa : {1.0, 4.0, 30.0}) {
      for (double eps : {1e-1, 1e-2, 1e-3}) {
        const SmoothnessSpec spec{ell, ell / kappa, 1.0};
        for (ParamPolicy policy : {ParamPolicy::theory, ParamPolicy::practical}) {
          IapunParams p;
          try {
            p = derive_params(spec, eps, policy);
          } catch (const ConstructionError&) {
            continue;
          }
          for (double v : {p.alpha, p.gamma, p.kappa_x, p.omega, p.d, p.chi, p.delta_x,
                           p.delta_y, p.big_delta_y}) {
            EXPECT_GT(v, 0.0);
            EXPECT_TRUE(std::isfinite(v));
          }
          EXPECT_EQ(p.delta_y, p.delta_x / 2.0);
        }
      }
    }
  }
}

TEST(DeriveParams, DerivedThresholds) {
  const IapunParams p = derive_params({1.0, 1.0, 4.0}, 0.01);
  EXPECT_DOUBLE_EQ(p.alpha, 0.2);
  EXPECT_DOUBLE_EQ(p.candidate_threshold(), 0.008 / (32.0 * 16.0));
  EXPECT_DOUBLE_EQ(p.epoch_descent(), std::min(1e-4 / 10.0, 0.008 / (72.0 * 16.0)));
  EXPECT_DOUBLE_EQ(p.ball_radius(), 0.2 / 16.0);
  EXPECT_DOUBLE_EQ(p.eta(), 0.05);
  EXPECT_DOUBLE_EQ(p.solve_radius(), std::sqrt(2.0 * p.delta_x / 1.4));
}

TEST(PrecisionFloor, RejectsToleranceBelowRoundingOfTheFunctionScale) {
  const IapunParams p = derive_params({1.0, 1.0, 1.0}, 0.1, ParamPolicy::practical);
  EXPECT_NO_THROW(check_precision_floor(p, 1.0));
  const double scale = p.delta_x / (kPrecisionFloorFactor * 2.220446049250313e-16) * 2.0;
  EXPECT_THROW(check_precision_floor(p, scale), PreconditionViolation);
  EXPECT_THROW(check_precision_floor(p, -scale), PreconditionViolation);
}

TEST(ParamPolicy, NamesRoundTrip) {
  for (ParamPolicy p : {ParamPolicy::theory, ParamPolicy::practical}) {
    EXPECT_EQ(policy_from_string(to_string(p)), p);
  }
  EXPECT_THROW(policy_from_string("fast"), PreconditionViolation);
}
