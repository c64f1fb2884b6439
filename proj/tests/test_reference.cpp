#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "sgld/errors.hpp"
#include "sgld/reference.hpp"

using namespace sgld;

TEST(Reference, GibbsGaussianMoment) {
  const auto q = LossModel::quadratic_data(1);
  const auto S = SampleSet::from_points(1, {0.0});
  for (double beta : {0.5, 2.0, 10.0}) {
    const auto spec = gibbs_spec(q, S, beta);
    const auto res = gibbs_expectation(spec, [&](std::span<const double> w) { return empirical_loss(q, w, S); });
    EXPECT_NEAR(res.value, 1 / (2 * beta), 1e-6 / (2 * beta)) << beta;
  }
}

TEST(Reference, GibbsNormalisationAndParity) {
  const auto r = LossModel::ripple(2, 1.0, 0.5);
  const auto S = SampleSet::from_points(2, {0.5, 0.2, -0.5, -0.2});
  const auto spec = gibbs_spec(r, S, 3.0);
  EXPECT_NEAR(gibbs_expectation(spec, [](std::span<const double>) { return 1.0; }).value, 1.0, 1e-12);
  // S is symmetric under w -> -w, so the first coordinate is odd.
  EXPECT_NEAR(gibbs_expectation(spec, [](std::span<const double> w) { return w[0]; }).value, 0.0, 1e-8);
}

TEST(Reference, GibbsTruncationCertificate) {
  const auto dw = LossModel::smoothed_double_well();
  const auto S = SampleSet::from_points(1, {0.2, -0.1});
  auto spec = gibbs_spec(dw, S, 2.0);
  auto obs = [](std::span<const double> w) { return w[0] * w[0]; };
  const auto base = gibbs_expectation(spec, obs);
  spec.r_trunc = 1.25 * base.r_trunc;
  const auto wider = gibbs_expectation(spec, obs);
  EXPECT_NEAR(wider.value, base.value, 1e-6 * base.value);
  EXPECT_LT(base.rel_change, 1e-6);
}

TEST(Reference, GibbsRejectsBadSpecs) {
  const auto q3 = LossModel::quadratic_data(3);
  const auto S3 = draw_sample_set(q3, 2, 1);
  auto one = [](std::span<const double>) { return 1.0; };
  EXPECT_THROW(gibbs_expectation(gibbs_spec(q3, S3, 1.0), one), UsageError);
  const auto q = LossModel::quadratic_data(1);
  auto spec = gibbs_spec(q, SampleSet::from_points(1, {0.0}), 1.0);
  spec.resolution = 100;
  EXPECT_THROW(gibbs_expectation(spec, one), UsageError);
}

TEST(Reference, OuSecondMoment) {
  const std::vector<double> x0{1.0, 2.0};
  EXPECT_DOUBLE_EQ(ou_second_moment(x0, 1.0, 2.0, 0.0), 5.0);
  EXPECT_NEAR(ou_second_moment(x0, 3.0, 0.5, 100.0), 2 * 0.5 / 6.0, 1e-15);
  const double beta = 4.0;
  EXPECT_NEAR(ou_second_moment(x0, 1.0, 2.0 / beta, 100.0), 2.0 / beta, 1e-15);
  EXPECT_THROW(ou_second_moment(x0, 0.0, 1.0, 1.0), UsageError);
}

TEST(Reference, GridMinExamples) {
  const auto q = LossModel::quadratic_data(2);
  const auto S = SampleSet::from_points(2, {0.3, -0.6});
  const std::vector<double> lo{-2, -2}, hi{2, 2};
  const auto g = grid_min([&](std::span<const double> w) { return empirical_loss(q, w, S); }, lo, hi, 200);
  EXPECT_NEAR(g.argmin[0], 0.3, 1e-6);
  EXPECT_NEAR(g.argmin[1], -0.6, 1e-6);
  EXPECT_NEAR(g.value, 0.0, 1e-12);
  EXPECT_LE(g.value, g.grid_value);

  const auto dw = LossModel::smoothed_double_well();
  const auto Z = SampleSet::from_points(1, {0.0});
  const std::vector<double> lo1{-4}, hi1{4};
  const auto d = grid_min([&](std::span<const double> w) { return empirical_loss(dw, w, Z); }, lo1, hi1, 1000);
  EXPECT_NEAR(std::abs(d.argmin[0]), 1.0, 1e-6);
  EXPECT_NEAR(d.value, 0.0, 1e-12);

  const auto r = LossModel::ripple(1, 1.0, 0.5);
  const auto one = SampleSet::from_points(1, {1.0});
  const auto rr = grid_min([&](std::span<const double> w) { return empirical_loss(r, w, one); }, lo1, hi1, 999);
  EXPECT_NEAR(rr.argmin[0], 0.0, 1e-6);
  EXPECT_NEAR(rr.value, 0.0, 1e-12);
}

TEST(Reference, GridMinCertificate) {
  const std::vector<double> lo{-1}, hi{3};
  const auto g = grid_min([](std::span<const double> w) { return std::cos(3 * w[0]); }, lo, hi, 100, 3.0);
  EXPECT_NEAR(g.certificate, 3.0 * 4.0 / 100, 1e-15);
  EXPECT_NEAR(g.value, -1.0, 1e-12);
}

TEST(Reference, EmpiricalLossInfimum) {
  const auto r = LossModel::ripple(1, 1.0, 0.5);
  const auto S = draw_sample_set(r, 32, 4);
  const auto inf = empirical_loss_infimum(r, S);
  EXPECT_TRUE(inf.certified);
  EXPECT_NEAR(inf.value, 0.0, 1e-12);  // ripple losses vanish at w = 0

  const auto q3 = LossModel::quadratic_data(3);
  const auto S3 = draw_sample_set(q3, 10, 4);
  const auto inf3 = empirical_loss_infimum(q3, S3);
  EXPECT_FALSE(inf3.certified);
  std::vector<double> mean(3, 0.0);
  for (std::size_t i = 0; i < S3.n; ++i)
    for (std::size_t j = 0; j < 3; ++j) mean[j] += S3.point(i)[j] / S3.n;
  EXPECT_NEAR(inf3.value, empirical_loss(q3, mean, S3), 1e-10);
}
