#pragma once

#include <filesystem>

#include "sgld/dynamics.hpp"
#include "sgld/harness/config.hpp"
#include "sgld/harness/result.hpp"

namespace sgld::harness {

// Verdict table over every built-in model with d <= 2. With
// cfg.negative_control the models declare m doubled, so the dissipativity
// verdicts must fail.
ExperimentResult lemma_suite(const ExperimentConfig& cfg, const std::filesystem::path& partial_dir = {});

ExperimentResult bounds_report(const ExperimentConfig& cfg, const std::filesystem::path& partial_dir = {});
ExperimentResult gen_gap(const ExperimentConfig& cfg, const std::filesystem::path& partial_dir = {});
ExperimentResult sa_convergence(const ExperimentConfig& cfg, const std::filesystem::path& partial_dir = {});
ExperimentResult sa_discretization(const ExperimentConfig& cfg, const std::filesystem::path& partial_dir = {});
ExperimentResult rademacher_study(const ExperimentConfig& cfg, const std::filesystem::path& partial_dir = {});
// ensemble_out, when set, receives the simulated trajectories.
ExperimentResult run_process(const ExperimentConfig& cfg, const std::filesystem::path& partial_dir = {},
                             TrajectoryEnsemble* ensemble_out = nullptr);

// Dispatches on cfg.experiment. When `partial_dir` is non-empty, grid-point
// results are written there as they complete and reused on a rerun with the
// same config digest. A failing grid point is recorded in `errors` and the
// run continues.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& partial_dir = {});

}  // namespace sgld::harness
