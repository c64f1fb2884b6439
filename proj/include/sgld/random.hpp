#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace sgld {

inline constexpr std::string_view kGeneratorId = "mt19937_64/std::normal_distribution";

// splitmix64 finaliser applied to (parent, stream); used to derive per-replica,
// per-draw and per-grid-point seeds from one master seed.
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream);

class GaussianSource {
 public:
  explicit GaussianSource(std::uint64_t seed) : engine_(seed) {}

  double next() { return normal_(engine_); }
  void fill(std::span<double> out) {
    for (double& v : out) v = normal_(engine_);
  }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace sgld
