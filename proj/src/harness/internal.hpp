#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sgld/harness/config.hpp"
#include "sgld/harness/result.hpp"
#include "sgld/statistics.hpp"

namespace sgld::harness::detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline MetricRow row(std::string key, std::string metric, double x, const Estimate& e, std::uint64_t seed,
                     std::string source, std::optional<double> overlay = std::nullopt) {
  return {std::move(key), std::move(metric), x, e.value, e.lo, e.hi, overlay, seed, std::move(source)};
}

inline MetricRow exact_row(std::string key, std::string metric, double x, double v, std::uint64_t seed,
                           std::string source, std::optional<double> overlay = std::nullopt) {
  return {std::move(key), std::move(metric), x, v, v, v, overlay, seed, std::move(source)};
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

ExperimentResult start_result(const ExperimentConfig& cfg);

// Per-grid-point files <dir>/<experiment>-<digest>-<key>.json holding the rows
// of one grid point.
class PartialStore {
 public:
  PartialStore(std::filesystem::path dir, const ExperimentConfig& cfg);
  bool enabled() const { return !dir_.empty(); }
  std::optional<std::vector<MetricRow>> load(const std::string& key) const;
  void store(const std::string& key, const std::vector<MetricRow>& rows) const;

 private:
  std::filesystem::path path(const std::string& key) const;
  std::filesystem::path dir_;
  std::string prefix_;
};

}  // namespace sgld::harness::detail
