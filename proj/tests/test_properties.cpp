// Property tests driven by seeded generators; every failure prints the case seed.
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "sgld/bounds.hpp"
#include "sgld/dynamics.hpp"
#include "sgld/loss_models.hpp"
#include "sgld/rademacher.hpp"
#include "sgld/reference.hpp"
#include "sgld/schedules.hpp"

using namespace sgld;

namespace {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed), seed_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_); }
  std::uint64_t seed() const { return seed_; }

  LossModel model(bool low_dim = true) {
    const std::size_t d = low_dim ? 1 + index(2) : 1 + index(4);
    switch (index(3)) {
      case 0: return LossModel::quadratic_data(d, DataDistribution::ball(uniform(0.2, 2.0)));
      case 1: return LossModel::ripple(d, uniform(0.3, 3.0), uniform(0.05, 1.0), DataDistribution::ball(uniform(0.2, 2.0)));
      default: return LossModel::smoothed_double_well(uniform(1.5, 5.0), DataDistribution::ball(uniform(0.1, 1.0)));
    }
  }

  std::vector<double> vec(std::size_t d, double radius) {
    std::vector<double> v(d);
    for (double& x : v) x = uniform(-radius, radius);
    return v;
  }

 private:
  std::mt19937_64 eng_;
  std::uint64_t seed_;
};

constexpr int kCases = 200;

}  // namespace

TEST(Properties, GradientMatchesCentralDifferences) {
  for (int c = 0; c < kCases; ++c) {
    Gen g(1000 + c);
    const auto m = g.model(false);
    const auto S = draw_sample_set(m, 1, g.seed());
    const auto w = g.vec(m.dimension(), 4.0);
    std::vector<double> grad(m.dimension());
    m.grad(w, S.point(0), grad);
    for (std::size_t j = 0; j < m.dimension(); ++j) {
      auto wp = w, wm = w;
      wp[j] += 1e-5;
      wm[j] -= 1e-5;
      const double fd = (m.loss(wp, S.point(0)) - m.loss(wm, S.point(0))) / 2e-5;
      EXPECT_NEAR(grad[j], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "case " << g.seed() << " " << m.describe();
    }
  }
}

TEST(Properties, LossIsNonNegative) {
  for (int c = 0; c < kCases; ++c) {
    Gen g(2000 + c);
    const auto m = g.model(false);
    const auto S = draw_sample_set(m, 5, g.seed());
    const auto w = g.vec(m.dimension(), 50.0);
    for (std::size_t i = 0; i < S.n; ++i) EXPECT_GE(m.loss(w, S.point(i)), 0.0) << "case " << g.seed();
  }
}

TEST(Properties, DissipativeSandwichHolds) {
  for (int c = 0; c < 40; ++c) {
    Gen g(3000 + c);
    const auto m = g.model();
    const auto S = draw_sample_set(m, 1 + g.index(32), g.seed());
    const auto rep = check_dissipative_sandwich(m, S, 250, g.seed());
    EXPECT_TRUE(rep.pass) << "case " << g.seed() << " " << m.describe() << " lower " << rep.min_lower_margin
                          << " upper " << rep.min_upper_margin;
  }
}

TEST(Properties, LevelSetRadius) {
  for (int c = 0; c < 40; ++c) {
    Gen g(4000 + c);
    const auto m = g.model();
    const auto S = draw_sample_set(m, 1 + g.index(16), g.seed());
    const double inf = empirical_loss_infimum(m, S, 2000, ExecutionPolicy::Serial).value;
    const auto& k = m.constants();
    for (int p = 0; p < 200; ++p) {
      const auto x = g.vec(m.dimension(), 20.0);
      double x2 = 0.0;
      for (double v : x) x2 += v * v;
      const double r = empirical_loss(m, x, S);
      EXPECT_LE(x2, 4 / k.m * (r + 0.5 * k.b * std::log(2.0) - inf) * (1 + 1e-9) + 1e-12) << "case " << g.seed();
    }
  }
}

TEST(Properties, TimeChangeRoundTripAndMonotone) {
  const auto sched = Schedule::iterated_log();
  Gen g(5000);
  for (int c = 0; c < 1000; ++c) {
    const double s = g.log_uniform(1e-3, 1e7);
    const double t = g.log_uniform(1e-3, 1e5);
    const double a = time_change(sched, s, t);
    EXPECT_GE(a, s + t);
    EXPECT_NEAR(time_change_integral(sched, s, a), t, 1e-7 * std::max(1.0, t)) << s << " " << t;
    if (c % 10 == 0) {
      EXPECT_GT(time_change(sched, s, 1.5 * t), a);
    }
  }
}

TEST(Properties, ConstantGammaTimeChangeIsShift) {
  Gen g(5500);
  for (int c = 0; c < 100; ++c) {
    const auto sched = Schedule::constant(g.uniform(0.1, 10));
    const double s = g.uniform(0, 1e4), t = g.uniform(0, 1e4);
    EXPECT_NEAR(time_change(sched, s, t), s + t, 1e-8);
  }
}

TEST(Properties, CouplingShapesAcrossInputs) {
  for (int c = 0; c < 12; ++c) {
    Gen g(6000 + c);
    CouplingInputs in{g.uniform(0.2, 4), g.uniform(0, 3), g.uniform(0.5, 5), 1 + g.index(2), 1.0, 1.0};
    in.gamma_t = g.uniform(1.0, 4.0);
    const CouplingConstants cc(in);
    EXPECT_LE(cc.kappa(), 0.5);
    EXPECT_LE(cc.c(), cc.lambda() / 2);
    EXPECT_GE(cc.xi(), cc.zeta());
    const auto x = g.vec(in.d, 3), y = g.vec(in.d, 3);
    const double r = cc.rho2(x, y);
    EXPECT_GE(r, 0.0);
    EXPECT_EQ(r, cc.rho2(y, x));
    double prev = 0.0;
    // f saturates where φ underflows; allow quadrature round-off there.
    for (int i = 1; i <= 8; ++i) {
      const double f = cc.f(cc.R2() * i / 8);
      EXPECT_GE(f, prev * (1 - 1e-12)) << "case " << g.seed();
      prev = f;
    }
  }
}

TEST(Properties, CoveringBoundMonotone) {
  Gen g(7000);
  for (int c = 0; c < kCases; ++c) {
    const double A = g.uniform(0, 3), B = g.uniform(0, 3), M = g.uniform(0.1, 3), R = g.uniform(0.1, 5);
    const std::size_t d = 1 + g.index(5);
    const double n = g.log_uniform(1, 1e6);
    EXPECT_LT(covering_gen_bound(A, B, M, d, R, n).rademacher, covering_gen_bound(A, B, M, d, 1.1 * R, n).rademacher);
    EXPECT_LE(covering_theorem_value(A, B, M, d, R, n), covering_gen_bound(A, B, M, d, R, n).rademacher * (1 + 1e-12));
    const double delta = g.log_uniform(1e-3, 10);
    EXPECT_GE(covering_number_ball(d, R, delta).count, covering_number_ball(d, R, 2 * delta).count);
  }
}

TEST(Properties, GridMinBelowProbes) {
  for (int c = 0; c < 20; ++c) {
    Gen g(8000 + c);
    const auto m = g.model();
    const auto S = draw_sample_set(m, 1 + g.index(8), g.seed());
    const auto F = [&](std::span<const double> w) { return empirical_loss(m, w, S); };
    const std::vector<double> lo(m.dimension(), -3.0), hi(m.dimension(), 3.0);
    const auto res = grid_min(F, lo, hi, m.dimension() == 1 ? 2000 : 200, std::nan(""), ExecutionPolicy::Serial);
    EXPECT_LE(res.value, res.grid_value);
    for (int p = 0; p < 500; ++p) EXPECT_LE(res.value, F(g.vec(m.dimension(), 3.0)) + 1e-15) << "case " << g.seed();
  }
}

TEST(Properties, SerialEqualsParallel) {
  for (int c = 0; c < 10; ++c) {
    Gen g(9000 + c);
    const auto m = g.model();
    const auto S = draw_sample_set(m, 1 + g.index(16), g.seed());
    const auto x0 = g.vec(m.dimension(), 2.0);
    SdeOptions o;
    o.t_end = 0.5;
    o.replicas = 1 + g.index(40);
    o.noise = {g.seed(), 1e-2};
    o.policy = ExecutionPolicy::Serial;
    const auto a = run_sde(m, S, Process::SaDiscrete, x0, Schedule::iterated_log(), o);
    o.policy = ExecutionPolicy::Parallel;
    const auto b = run_sde(m, S, Process::SaDiscrete, x0, Schedule::iterated_log(), o);
    EXPECT_EQ(a.states, b.states) << "case " << g.seed();
  }
}

TEST(Properties, SignFlipSymmetry) {
  const auto q = LossModel::quadratic_data(1);
  const auto S = draw_sample_set(q, 24, 10);
  RademacherOptions o;
  o.R = 1.0;
  o.K = 400;
  o.grid_per_radius = 100;
  o.seed = 3;
  const auto plus = empirical_rademacher(q, S, o);
  o.negate_signs = true;
  const auto minus = empirical_rademacher(q, S, o);
  std::vector<double> diff(o.K);
  for (std::size_t k = 0; k < o.K; ++k) diff[k] = (plus.per_draw_sup[k] - minus.per_draw_sup[k]) / S.n;
  const auto ci = mean_ci(diff);
  EXPECT_LE(ci.lo, 0.0);
  EXPECT_GE(ci.hi, 0.0);
}
