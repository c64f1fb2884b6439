#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sgld/loss_models.hpp"
#include "sgld/parallel.hpp"
#include "sgld/statistics.hpp"

namespace sgld {

enum class SupOptimizer { Grid, MultiStartAscent };
std::string_view to_string(SupOptimizer o);
SupOptimizer parse_sup_optimizer(std::string_view name);

struct RademacherOptions {
  double R = 1.0;
  std::size_t K = 200;
  SupOptimizer optimizer = SupOptimizer::Grid;
  std::uint64_t seed = 0;
  bool negate_signs = false;        // use -σ for every draw
  std::size_t grid_per_radius = 500;  // grid spacing R / grid_per_radius
  std::size_t starts = 32;
  std::size_t resamples = 1000;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;
};

struct RademacherEstimate {
  double R = 0.0;
  std::size_t n = 0;
  std::size_t K = 0;
  double estimate = 0.0;  // mean of per_draw_sup / n
  Estimate ci;            // bootstrap 95% over draws
  SupOptimizer optimizer = SupOptimizer::Grid;
  std::vector<double> per_draw_sup;
  // Grid mode: (A + MR) R sqrt(d) / grid_per_radius. Ascent mode: NaN (lower bound only).
  double resolution_error = 0.0;
  bool lower_bound = false;
  std::uint64_t seed = 0;
};

RademacherEstimate empirical_rademacher(const LossModel& model, const SampleSet& S, const RademacherOptions& opts);

// Sign vector of draw k: σ_i = ±1 from derive_seed(seed, k).
std::vector<double> rademacher_signs(std::size_t n, std::uint64_t seed, std::size_t k);

struct CoveringCount {
  std::uint64_t count = 0;  // ⌈(R sqrt(d)/δ + 1)^d⌉, saturated at UINT64_MAX
  bool saturated = false;
  double log_value = 0.0;   // d log(R sqrt(d)/δ + 1)
};
CoveringCount covering_number_ball(std::size_t d, double R, double delta);

// sqrt(2 (2 + b log 2) / m).
double rademacher_ball_radius(double m, double b);

struct GenGapConfig {
  std::vector<std::size_t> sample_sizes{16, 32, 64, 128, 256, 512, 1024};
  std::size_t draws = 64;
  std::size_t replicas = 64;
  double t = 10.0;
  double beta = 5.0;
  double step = 1e-2;
  std::vector<double> x0;  // empty: origin
  std::uint64_t seed = 0;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;
};

struct GenGapPoint {
  std::size_t n = 0;
  Estimate signed_gap;    // E[L(X_t) - L_n(X_t)], CI over draws
  Estimate abs_gap;       // E_S |E[L(X_t) - L_n(X_t) | S]|, bootstrap CI over draws
  double overlay = 0.0;   // sqrt(log(n+1)/n)
  std::vector<double> per_draw_gap;
  std::uint64_t seed = 0;
};

// Gap at time t of sgld-continuous at fixed β, one entry per draw in `draws`.
GenGapPoint gen_gap_for_draws(const LossModel& model, std::span<const SampleSet> draws, const GenGapConfig& cfg,
                              std::uint64_t seed);
// Draws cfg.draws sample sets per n with seeds derive_seed(derive_seed(seed, n), j).
std::vector<GenGapPoint> gen_gap_estimate(const LossModel& model, const GenGapConfig& cfg);

}  // namespace sgld
