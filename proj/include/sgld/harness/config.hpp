#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <string>
#include <string_view>
#include <vector>

#include "sgld/loss_models.hpp"
#include "sgld/parallel.hpp"
#include "sgld/schedules.hpp"

namespace sgld::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kOutputRootEnv = "SGLD_OUTPUT_ROOT";

enum class ExperimentId { GenGap, SaConvergence, SaDiscretization, LemmaSuite, BoundsReport, RademacherStudy, Run };
std::string_view to_string(ExperimentId id);
ExperimentId parse_experiment_id(std::string_view name);

struct ModelSpec {
  std::string family = "quadratic-data";
  std::size_t d = 1;
  double mu = 1.0;
  double eps = 0.5;
  double w_cut = 3.0;
  std::string data = "uniform-ball";
  double data_scale = 1.0;
  std::vector<double> data_point;

  LossModel build() const;
  bool operator==(const ModelSpec&) const = default;
};

struct ScheduleSpec {
  std::string kind = "iterated-log";  // iterated-log | constant
  double gamma = 1.0;                 // constant mode
  double offset = 0.0;                // 0: e^{e^e}

  Schedule build() const;
  bool operator==(const ScheduleSpec&) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ExperimentId experiment = ExperimentId::BoundsReport;
  ModelSpec model;
  ScheduleSpec schedule;

  std::vector<std::size_t> n_values{16, 32, 64, 128, 256, 512, 1024};
  std::vector<double> s_values{1e2, 1e3, 1e4};
  std::vector<double> t_values{20.0};
  std::vector<double> h_values{2.5e-3, 5e-3, 1e-2};
  std::vector<double> r_values{0.5, 1.0, 2.0};

  std::size_t n = 32;          // sample size for single-sample experiments
  std::size_t replicas = 256;
  std::size_t draws = 64;      // sample-set draws (gen-gap)
  std::size_t K = 200;         // sign-vector draws (rademacher-study)
  std::string optimizer = "grid";
  double beta = 5.0;
  double t = 10.0;
  double step = 1e-2;
  double p = 2.0;
  double delta = 1.0;
  std::vector<double> x0;      // empty: origin
  std::string process = "sgld-continuous";  // run subcommand
  bool negative_control = false;            // lemma-suite: declare m doubled

  std::uint64_t seed = 0;
  std::string output_dir = "out";
  ExecutionPolicy policy = ExecutionPolicy::Parallel;

  // Grids non-empty and sorted ascending; throws UsageError.
  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig load_config(const std::filesystem::path& path);
// Relative output directories are placed under $SGLD_OUTPUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg);
// Stable 64-bit digest of the config, used to key resumable partial files.
std::uint64_t config_digest(const ExperimentConfig& cfg);

}  // namespace sgld::harness
