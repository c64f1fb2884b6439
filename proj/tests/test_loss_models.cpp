#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sgld/errors.hpp"
#include "sgld/loss_models.hpp"

using namespace sgld;

TEST(LossModels, QuadraticLossAtCoincidentPoints) {
  const auto q = LossModel::quadratic_data(2);
  const std::vector<double> w{0.0, 0.0}, z{0.0, 0.0};
  EXPECT_EQ(q.loss(w, z), 0.0);
}

TEST(LossModels, QuadraticLossHandValue) {
  const auto q = LossModel::quadratic_data(1);
  const std::vector<double> w{2.0}, z{1.0};
  EXPECT_DOUBLE_EQ(q.loss(w, z), 0.5);
}

TEST(LossModels, RippleVanishesAtOrigin) {
  const auto r = LossModel::ripple(2, 1.0, 0.5);
  const std::vector<double> w{0.0, 0.0};
  for (double a : {0.0, 0.3, -0.7}) {
    const std::vector<double> z{a, 0.5 * a};
    EXPECT_EQ(r.loss(w, z), 0.0);
  }
}

TEST(LossModels, GradientExamples) {
  const auto q1 = LossModel::quadratic_data(1);
  std::vector<double> g1(1);
  const std::vector<double> w1{0.4};
  q1.grad(w1, w1, g1);
  EXPECT_EQ(g1[0], 0.0);

  const auto r = LossModel::ripple(1, 1.0, 0.5);
  const std::vector<double> zero{0.0}, one{1.0};
  r.grad(zero, one, g1);
  EXPECT_EQ(g1[0], 0.0);

  const auto q2 = LossModel::quadratic_data(2);
  std::vector<double> g2(2);
  const std::vector<double> w2{1.0, 1.0}, z2{0.0, 0.0};
  q2.grad(w2, z2, g2);
  EXPECT_DOUBLE_EQ(g2[0], 1.0);
  EXPECT_DOUBLE_EQ(g2[1], 1.0);
}

TEST(LossModels, DimensionMismatchIsUsageError) {
  const auto q = LossModel::quadratic_data(2);
  const std::vector<double> w{1.0}, z{0.0, 0.0};
  EXPECT_THROW(q.loss(w, z), UsageError);
}

TEST(LossModels, EmpiricalLoss) {
  const auto q = LossModel::quadratic_data(1);
  const auto S = SampleSet::from_points(1, {-1.0, 1.0});
  const std::vector<double> w{0.0};
  EXPECT_DOUBLE_EQ(empirical_loss(q, w, S), 0.5);

  const auto single = SampleSet::from_points(1, {0.3});
  const std::vector<double> w2{-0.2};
  EXPECT_DOUBLE_EQ(empirical_loss(q, w2, single), q.loss(w2, single.point(0)));
}

TEST(LossModels, DuplicatingSampleLeavesEmpiricalLossUnchanged) {
  const auto r = LossModel::ripple(1, 1.0, 0.5);
  const auto S = draw_sample_set(r, 17, 5);
  std::vector<double> doubled = S.points;
  doubled.insert(doubled.end(), S.points.begin(), S.points.end());
  const auto S2 = SampleSet::from_points(1, doubled);
  for (double w : {-2.0, 0.1, 1.7}) {
    const std::vector<double> v{w};
    EXPECT_NEAR(empirical_loss(r, v, S), empirical_loss(r, v, S2), 1e-15);
  }
}

TEST(LossModels, EmptySampleIsUsageError) {
  const auto q = LossModel::quadratic_data(1);
  SampleSet S;
  S.d = 1;
  const std::vector<double> w{0.0};
  EXPECT_THROW(empirical_loss(q, w, S), UsageError);
}

TEST(LossModels, ExpectedLossClosedForms) {
  const auto q1 = LossModel::quadratic_data(1, DataDistribution::cube(1.0));
  const std::vector<double> zero1{0.0};
  EXPECT_NEAR(q1.expected_loss(zero1), 1.0 / 6.0, 1e-15);
  const auto q2 = LossModel::quadratic_data(2, DataDistribution::cube(1.0));
  EXPECT_NEAR(q2.min_expected_loss(), 1.0 / 3.0, 1e-15);
  const std::vector<double> w2{0.5, -1.0};
  EXPECT_NEAR(q2.expected_loss(w2), 0.5 * 1.25 + 1.0 / 3.0, 1e-14);

  for (const auto& dist : {DataDistribution::ball(1.0), DataDistribution::cube(0.5)}) {
    const auto r = LossModel::ripple(2, 1.0, 0.5, dist);
    const std::vector<double> zero{0.0, 0.0};
    EXPECT_EQ(r.expected_loss(zero), 0.0);
  }
}

TEST(LossModels, ExpectedLossMatchesQuadrature) {
  const std::vector<LossModel> models{
      LossModel::quadratic_data(1), LossModel::quadratic_data(2, DataDistribution::cube(1.0)),
      LossModel::ripple(1, 1.0, 0.5), LossModel::ripple(2, 1.0, 0.5, DataDistribution::ball(1.0)),
      LossModel::ripple(2, 2.0, 0.3, DataDistribution::cube(0.7))};
  for (const auto& m : models) {
    std::vector<double> w(m.dimension(), 0.4);
    w[0] = -1.3;
    EXPECT_NEAR(m.expected_loss(w), m.expected_loss_by_quadrature(w), 1e-8) << m.describe();
  }
}

TEST(LossModels, PointMassHasNoSamplingError) {
  const auto r = LossModel::ripple(1, 1.0, 0.5, DataDistribution::point_mass({0.6}));
  const auto S = draw_sample_set(r, 8, 3);
  for (double w : {-1.0, 0.0, 2.5}) {
    const std::vector<double> v{w};
    EXPECT_NEAR(r.expected_loss(v), empirical_loss(r, v, S), 1e-15);
  }
}

TEST(LossModels, DeclaredConstants) {
  const auto q = LossModel::quadratic_data(1);
  EXPECT_EQ(q.constants().m, 0.5);
  EXPECT_EQ(q.constants().b, 0.5);
  EXPECT_EQ(q.constants().M, 1.0);
  const auto r = LossModel::ripple(1, 1.0, 0.5);
  EXPECT_EQ(r.constants().m, 0.5);
  EXPECT_EQ(r.constants().b, 0.125);
  EXPECT_EQ(r.constants().M, 1.5);
}

TEST(LossModels, RegularityPassesForBuiltIns) {
  const std::vector<LossModel> models{LossModel::quadratic_data(1), LossModel::quadratic_data(2),
                                      LossModel::ripple(1, 1.0, 0.5), LossModel::ripple(2, 1.0, 0.5),
                                      LossModel::smoothed_double_well()};
  for (const auto& m : models) {
    const auto rep = verify_regularity(m, 2000, 11);
    EXPECT_TRUE(rep.pass) << m.describe() << ": " << rep.first_violation;
    EXPECT_EQ(rep.violations, 0u);
  }
}

TEST(LossModels, RegularityFailsWithInflatedM) {
  auto c = LossModel::quadratic_data(1).constants();
  c.m = 10.0;
  const auto bad = LossModel::quadratic_data(1).with_constants(c);
  const auto rep = verify_regularity(bad, 2000, 11);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.violations, 0u);
}

TEST(LossModels, DoubleWellIsC1AtTheSeam) {
  const auto dw = LossModel::smoothed_double_well(3.0);
  const std::vector<double> z{0.0};
  std::vector<double> gin(1), gout(1);
  const std::vector<double> in{3.0 - 1e-9}, out{3.0 + 1e-9};
  dw.grad(in, z, gin);
  dw.grad(out, z, gout);
  EXPECT_NEAR(gin[0], gout[0], 1e-6);
  EXPECT_NEAR(dw.loss(in, z), dw.loss(out, z), 1e-6);
}

TEST(LossModels, SampleSetRespectsSupport) {
  const auto r = LossModel::ripple(2, 1.0, 0.5, DataDistribution::ball(0.8));
  const auto S = draw_sample_set(r, 500, 1);
  EXPECT_EQ(S.n, 500u);
  EXPECT_EQ(S.seed, 1u);
  for (std::size_t i = 0; i < S.n; ++i) {
    const auto z = S.point(i);
    EXPECT_LE(std::hypot(z[0], z[1]), 0.8 + 1e-15);
  }
  EXPECT_NO_THROW(validate_sample(r, S));
  const auto outside = SampleSet::from_points(2, {0.9, 0.0});
  EXPECT_THROW(validate_sample(r, outside), UsageError);
}
