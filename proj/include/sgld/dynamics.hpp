#pragma once

#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sgld/loss_models.hpp"
#include "sgld/parallel.hpp"
#include "sgld/random.hpp"
#include "sgld/schedules.hpp"
#include "sgld/statistics.hpp"

namespace sgld {

class CouplingConstants;

enum class Process { SgldDiscrete, SgldContinuous, SaContinuous, SaDiscrete, GradientFlow };

std::string_view to_string(Process process);
Process parse_process(std::string_view name);

// Replica r draws its Brownian increments from derive_seed(seed, r).
struct NoiseStream {
  std::uint64_t seed = 0;
  double step = 1e-3;
  std::string generator = std::string(kGeneratorId);

  std::uint64_t replica_seed(std::size_t r) const { return derive_seed(seed, r); }
};

struct TrajectoryEnsemble {
  Process process = Process::SgldContinuous;
  std::size_t replicas = 0;
  std::size_t d = 0;
  std::vector<double> times;
  std::vector<double> states;  // replica-major: [r][time][coordinate]
  std::string model;
  std::string schedule;
  NoiseStream noise;

  std::span<const double> state(std::size_t r, std::size_t ti) const {
    return {states.data() + (r * times.size() + ti) * d, d};
  }
};

struct SdeOptions {
  double t_end = 1.0;
  std::vector<double> record_times;  // snapped to the step grid; t_end is always recorded
  std::size_t replicas = 1000;
  NoiseStream noise;
  // Replace the left-endpoint diffusion coefficient by sqrt(∫ 2/γ / Δt) per step.
  bool exact_noise_variance = false;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;
};

// Exact recursion X_{k+1} = X_k - η ∇L_n(X_k) + sqrt(2η/β) ε_k. β = +inf turns
// the noise off. Empty record_steps records every step 0..k_max.
struct SgldDiscreteOptions {
  double step = 0.01;
  double beta = 1.0;
  std::size_t k_max = 100;
  std::vector<std::size_t> record_steps;
  std::size_t replicas = 1;
  NoiseStream noise;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;
};

TrajectoryEnsemble run_sgld_discrete(const LossModel& model, const SampleSet& S,
                                     std::span<const double> x0, const SgldDiscreteOptions& opts);

// Euler-Maruyama for the continuous processes. sgld-continuous takes
// Schedule::constant(β); gradient-flow ignores the schedule.
TrajectoryEnsemble run_sde(const LossModel& model, const SampleSet& S, Process process,
                           std::span<const double> x0, const Schedule& schedule, const SdeOptions& opts);

// Z̃_{k+1} = Z̃_k - η_{k+1} ∇L_n(Z̃_k) + sqrt(η̃_k) ε_k on the grid T_0..T_kmax.
TrajectoryEnsemble run_sa_discrete_grid(const LossModel& model, const SampleSet& S,
                                        std::span<const double> x0, const Schedule& schedule,
                                        std::size_t k_max, std::size_t replicas, const NoiseStream& noise,
                                        ExecutionPolicy policy = ExecutionPolicy::Parallel);

struct CoupledRun {
  TrajectoryEnsemble first;
  TrajectoryEnsemble second;
  std::vector<double> distance;  // [r][time] of ‖Z - Z'‖
  std::vector<double> rho2;      // [r][time] of ρ₂(Z, Z'); empty without coupling constants
  std::vector<Estimate> mean_distance;
  std::vector<Estimate> mean_rho2;
  double step = 0.0;
};

// Both processes consume the same Brownian path.
CoupledRun run_coupled(const LossModel& model, const SampleSet& S, Process a, Process b,
                       std::span<const double> x0, const Schedule& schedule, const SdeOptions& opts,
                       const CouplingConstants* rho = nullptr);

// One coupled run per internal step in `steps`. When every step is the
// smallest one times a power of two, all levels share a single Brownian path
// (coarse increments are sums of fine ones); otherwise each level draws its own.
std::vector<CoupledRun> run_coupled_levels(const LossModel& model, const SampleSet& S, Process a, Process b,
                                           std::span<const double> x0, const Schedule& schedule,
                                           const SdeOptions& opts, std::span<const double> steps,
                                           const CouplingConstants* rho = nullptr);
bool levels_share_noise(std::span<const double> steps);

struct ProbabilityEstimate {
  Estimate probability;  // Wilson 95%
  std::size_t hits = 0;
  std::size_t replicas = 0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

// P(sup_{u<=t} ‖X_u - Y_u‖ >= δ) for the gradient flow X and SGLD Y at inverse
// temperature gamma_s, started together. Supremum over the step grid.
ProbabilityEstimate flow_divergence_probability(const LossModel& model, const SampleSet& S,
                                                std::span<const double> x0, double gamma_s, double delta,
                                                double t, std::size_t replicas, const NoiseStream& noise,
                                                ExecutionPolicy policy = ExecutionPolicy::Parallel);
double flow_divergence_bound(double M, std::size_t d, double gamma_s, double delta, double t);

// Fraction of replicas with sup_{u<=T} L_n(Z_u) > level on the step grid.
ProbabilityEstimate exit_probability(const LossModel& model, const SampleSet& S, std::span<const double> x0,
                                     double level, double T, std::size_t replicas, const Schedule& schedule,
                                     const NoiseStream& noise,
                                     ExecutionPolicy policy = ExecutionPolicy::Parallel);

struct MomentSeries {
  std::vector<double> times;
  std::vector<Estimate> moments;  // bootstrap 95% CI
};
MomentSeries moment_estimate(const TrajectoryEnsemble& ensemble, double p, std::size_t resamples = 1000,
                             std::uint64_t seed = 0);

// Columnar CSV "replica,time,x0,...,x{d-1}" with %.17g values.
std::string trajectory_csv(const TrajectoryEnsemble& ensemble);
// Per-time mean and second moment with 95% CIs, plus provenance.
nlohmann::json trajectory_summary(const TrajectoryEnsemble& ensemble);

}  // namespace sgld
