#pragma once

#include <cstddef>
#include <string>

namespace sgld {

// e^{e^e}: the offset making (log)^3(t + offset) equal to 1 at t = 0.
double default_schedule_offset();

// Inverse-temperature schedule γ(t) = log log log(t + c3), or a constant γ
// test mode. Step sizes follow η_k = 1/k regardless of the γ mode.
class Schedule {
 public:
  static Schedule iterated_log(double offset = default_schedule_offset());
  static Schedule constant(double gamma);

  double gamma(double t) const;
  double gamma0() const { return gamma(0.0); }
  bool is_constant() const { return constant_; }
  double offset() const { return offset_; }
  double constant_value() const { return value_; }
  std::string describe() const;

  bool operator==(const Schedule&) const = default;

 private:
  Schedule(bool constant, double offset, double value) : constant_(constant), offset_(offset), value_(value) {}
  bool constant_ = false;
  double offset_ = 0.0;
  double value_ = 1.0;
};

double step_size(std::size_t k);   // η_k = 1/k, k >= 1
double grid_time(std::size_t k);   // T_k = Σ_{j<=k} η_j, T_0 = 0
// Index k with T_k < t <= T_{k+1}; 0 when t <= T_1.
std::size_t grid_index(double t);
// φ(t) = T_k on (T_k, T_{k+1}], 0 on [0, T_1].
double frozen_time(double t);

// ∫_a^b 2/γ(u) du.
double noise_variance_integral(const Schedule& s, double a, double b);
// η̃_k = ∫_{T_k}^{T_{k+1}} 2/γ.
double eta_tilde(const Schedule& s, std::size_t k);

// ∫_s^r γ(s)/γ(u) du.
double time_change_integral(const Schedule& s, double from, double to);
// α(s, t): the root r of ∫_s^r γ(s)/γ(u) du = t.
double time_change(const Schedule& s, double start, double duration);

}  // namespace sgld
