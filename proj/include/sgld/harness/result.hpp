#pragma once

#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sgld::harness {

// One grid point of one metric. `source` is "module::operation".
struct MetricRow {
  std::string key;
  std::string metric;
  double x = 0.0;
  double value = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::optional<double> overlay;
  std::uint64_t seed = 0;
  std::string source;

  bool operator==(const MetricRow& o) const;
};

struct Verdict {
  std::string name;
  bool pass = false;
  double margin = 0.0;  // >= 0 means the inequality holds
  std::string detail;
  bool operator==(const Verdict&) const = default;
};

struct GridPointError {
  std::string key;
  std::string message;
  bool operator==(const GridPointError&) const = default;
};

struct ExperimentResult {
  std::string experiment;
  nlohmann::json config;
  std::vector<MetricRow> rows;
  std::vector<Verdict> verdicts;
  std::vector<GridPointError> errors;
  nlohmann::json extra;  // experiment-specific payload (bound reports, per-draw values)
  double wall_clock_s = 0.0;
  std::uint64_t master_seed = 0;

  bool all_pass() const;
  nlohmann::json provenance() const;
  nlohmann::json to_json() const;
  static ExperimentResult from_json(const nlohmann::json& j);
  bool operator==(const ExperimentResult&) const;
};

// Row values serialise NaN and infinities as strings so the round trip is exact.
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& j);

enum class EmitFormat { Csv, Json, PlotData };
EmitFormat parse_emit_format(std::string_view name);

inline constexpr const char* kCsvHeader = "experiment,key,metric,x,value,ci_lo,ci_hi,overlay,seed,source";

std::string to_csv(const ExperimentResult& r);
// Returns the files written. Throws std::runtime_error naming the path on I/O failure.
std::vector<std::filesystem::path> emit(const ExperimentResult& r, EmitFormat format,
                                        const std::filesystem::path& dir);
ExperimentResult read_result(const std::filesystem::path& path);

}  // namespace sgld::harness
