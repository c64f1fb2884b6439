#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sgld/loss_models.hpp"
#include "sgld/parallel.hpp"

namespace sgld {

using ScalarField = std::function<double(std::span<const double>)>;

// Gibbs measure π ∝ e^{-β F} in d <= 2 for an (m, b)-dissipative F.
struct GibbsSpec {
  double beta = 1.0;
  std::size_t d = 1;
  ScalarField target;
  double m = 0.0;
  double b = 0.0;
  double r_trunc = 0.0;          // 0: chosen from the dissipativity tail bound
  std::size_t resolution = 257;  // starting points per axis
  double rel_tol = 1e-6;
  double tail_tol = 1e-10;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;
};

GibbsSpec gibbs_spec(const LossModel& model, const SampleSet& S, double beta);

struct GibbsResult {
  double value = 0.0;
  double r_trunc = 0.0;
  std::size_t resolution = 0;
  double rel_change = 0.0;  // between the last two resolutions
};

GibbsResult gibbs_expectation(const GibbsSpec& spec, const ScalarField& observable);

// E‖Z_t‖² for dZ = -rate Z dt + sqrt(noise_variance) dW, Z_0 = x0.
double ou_second_moment(std::span<const double> x0, double rate, double noise_variance, double t);

struct GridMinResult {
  std::vector<double> argmin;
  double value = 0.0;
  double grid_value = 0.0;  // before the polish
  double certificate = std::numeric_limits<double>::quiet_NaN();  // lipschitz * diag / resolution
  std::size_t evaluations = 0;
};

// Exhaustive scan of the box [lo, hi] with `resolution` intervals per axis, then
// a pattern-search polish that only accepts decreases.
GridMinResult grid_min(const ScalarField& target, std::span<const double> lo, std::span<const double> hi,
                       std::size_t resolution, double lipschitz = std::numeric_limits<double>::quiet_NaN(),
                       ExecutionPolicy policy = ExecutionPolicy::Parallel);

struct InfimumResult {
  double value = 0.0;
  std::vector<double> argmin;
  bool certified = false;  // grid scan (d <= 2); otherwise an upper bound from multi-start descent
  double certificate = std::numeric_limits<double>::quiet_NaN();
  double box_radius = 0.0;
  std::string method;
};

// inf L_n. Every stationary point satisfies ‖w‖ <= sqrt(b/m), so the scan box
// has that half-width.
InfimumResult empirical_loss_infimum(const LossModel& model, const SampleSet& S, std::size_t resolution = 0,
                                     ExecutionPolicy policy = ExecutionPolicy::Parallel);

}  // namespace sgld
