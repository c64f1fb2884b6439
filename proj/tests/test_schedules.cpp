#include <gtest/gtest.h>

#include <cmath>

#include "sgld/errors.hpp"
#include "sgld/schedules.hpp"

using namespace sgld;

TEST(Schedules, GammaAtZeroIsOne) {
  EXPECT_NEAR(Schedule::iterated_log().gamma(0.0), 1.0, 1e-15);
  EXPECT_EQ(Schedule::iterated_log().gamma0(), Schedule::iterated_log().gamma(0.0));
}

TEST(Schedules, GammaHitsThreeLogLevel) {
  // e^{e^{e^2}} overflows a double; e^{e^{e^{1.5}}} does not.
  const auto s = Schedule::iterated_log();
  const double t = std::exp(std::exp(std::exp(1.5))) - default_schedule_offset();
  EXPECT_NEAR(s.gamma(t), 1.5, 1e-12);
}

TEST(Schedules, GammaStrictlyIncreasing) {
  const auto s = Schedule::iterated_log();
  double prev = s.gamma(0.0);
  for (double t = 1.0; t < 1e12; t *= 3.7) {
    const double g = s.gamma(t);
    EXPECT_GT(g, prev) << t;
    prev = g;
  }
}

TEST(Schedules, StepGrid) {
  EXPECT_EQ(step_size(1), 1.0);
  EXPECT_EQ(step_size(4), 0.25);
  EXPECT_EQ(grid_time(0), 0.0);
  EXPECT_DOUBLE_EQ(grid_time(2), 1.5);
  EXPECT_DOUBLE_EQ(frozen_time(1.2), 1.0);
  EXPECT_EQ(frozen_time(0.5), 0.0);
  EXPECT_EQ(frozen_time(1.0), 0.0);
  EXPECT_EQ(grid_index(1.2), 1u);
  for (std::size_t k : {1u, 2u, 10u, 64u, 65u, 1000u, 100000u}) EXPECT_LE(grid_time(k), 1.0 + std::log(double(k)));
}

TEST(Schedules, HarmonicSumContinuityAcrossAsymptoticSwitch) {
  double direct = 0.0;
  for (int j = 1; j <= 200; ++j) {
    direct += 1.0 / j;
    EXPECT_NEAR(grid_time(static_cast<std::size_t>(j)), direct, 1e-12) << j;
  }
}

TEST(Schedules, FrozenTimeJumpsAtGridTimes) {
  for (std::size_t k = 1; k < 40; ++k) {
    const double T = grid_time(k);
    EXPECT_EQ(frozen_time(T + 1e-12), T) << k;
    EXPECT_EQ(frozen_time(T - 1e-12), grid_time(k - 1)) << k;
  }
}

TEST(Schedules, EtaTildeConstantGamma) {
  const auto s = Schedule::constant(1.0);
  for (std::size_t k : {1u, 2u, 7u, 50u}) EXPECT_NEAR(eta_tilde(s, k), 2.0 / double(k + 1), 1e-12);
}

TEST(Schedules, EtaTildeDefaultSchedule) {
  const auto s = Schedule::iterated_log();
  const double e1 = eta_tilde(s, 1);
  EXPECT_GT(e1, 0.0);
  EXPECT_LT(e1, 1.0);
  for (std::size_t k : {1u, 3u, 20u}) EXPECT_LT(eta_tilde(s, k), 2.0 * step_size(k + 1));
}

TEST(Schedules, TimeChangeConstantGammaIsShift) {
  const auto s = Schedule::constant(3.0);
  EXPECT_NEAR(time_change(s, 2.0, 5.0), 7.0, 1e-8);
  EXPECT_EQ(time_change(s, 4.0, 0.0), 4.0);
}

TEST(Schedules, TimeChangeBracket) {
  const auto s = Schedule::iterated_log();
  const double start = 1e6, dur = std::pow(1e6, 2.0 / 3.0);
  const double a = time_change(s, start, dur);
  EXPECT_GE(a, start + dur);
  EXPECT_LE(a, start + 2 * dur);
  EXPECT_NEAR(time_change_integral(s, start, a), dur, 1e-7);
}

TEST(Schedules, TimeChangeAtZeroStart) {
  const auto s = Schedule::iterated_log();
  EXPECT_EQ(time_change(s, 0.0, 0.0), 0.0);
  const double a = time_change(s, 0.0, 10.0);
  EXPECT_GE(a, 10.0);
  EXPECT_NEAR(time_change_integral(s, 0.0, a), 10.0, 1e-7);
}

TEST(Schedules, InvalidArguments) {
  EXPECT_THROW(Schedule::constant(0.0), UsageError);
  EXPECT_THROW(Schedule::iterated_log().gamma(-1.0), UsageError);
  EXPECT_THROW(step_size(0), UsageError);
  EXPECT_THROW(time_change(Schedule::iterated_log(), -1.0, 1.0), UsageError);
}
