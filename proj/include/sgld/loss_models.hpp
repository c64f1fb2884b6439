#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sgld {

enum class LossFamily { QuadraticData, Ripple, SmoothedDoubleWell };
enum class DataKind { UniformBall, UniformCube, PointMass };

std::string_view to_string(LossFamily family);
std::string_view to_string(DataKind kind);
LossFamily parse_loss_family(std::string_view name);
DataKind parse_data_kind(std::string_view name);

// The data law 𝒟. `scale` is the ball radius or the cube half-width.
struct DataDistribution {
  DataKind kind = DataKind::UniformBall;
  double scale = 1.0;
  std::vector<double> point;

  static DataDistribution ball(double radius) { return {DataKind::UniformBall, radius, {}}; }
  static DataDistribution cube(double half_width) { return {DataKind::UniformCube, half_width, {}}; }
  static DataDistribution point_mass(std::vector<double> p) {
    return {DataKind::PointMass, 0.0, std::move(p)};
  }

  // Radius of the smallest origin-centred ball containing the support.
  double z_max(std::size_t d) const;
  bool operator==(const DataDistribution&) const = default;
};

// (m, b)-dissipativity, M-smoothness, sup_z ‖∇ℓ(0;z)‖ ≤ A, sup_z |ℓ(0;z)| ≤ B.
struct RegularityConstants {
  double m = 0.0;
  double b = 0.0;
  double M = 0.0;
  double A = 0.0;
  double B = 0.0;
  bool operator==(const RegularityConstants&) const = default;
};

struct SampleSet {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> points;  // row-major n x d
  std::string provenance;
  std::uint64_t seed = 0;

  std::span<const double> point(std::size_t i) const { return {points.data() + i * d, d}; }
  static SampleSet from_points(std::size_t d, std::vector<double> flat, std::string provenance = "explicit");
};

class LossModel {
 public:
  static LossModel quadratic_data(std::size_t d, DataDistribution dist = {});
  static LossModel ripple(std::size_t d, double mu = 1.0, double eps = 0.5, DataDistribution dist = {});
  static LossModel smoothed_double_well(double w_cut = 3.0, DataDistribution dist = {});

  LossFamily family() const { return family_; }
  std::size_t dimension() const { return d_; }
  const std::vector<double>& parameters() const { return params_; }
  const DataDistribution& distribution() const { return dist_; }
  const RegularityConstants& constants() const { return constants_; }
  double z_max() const { return dist_.z_max(d_); }
  std::string describe() const;

  // Copy with replaced declared constants; used for negative controls.
  LossModel with_constants(RegularityConstants c) const;

  double loss(std::span<const double> w, std::span<const double> z) const;
  void grad(std::span<const double> w, std::span<const double> z, std::span<double> out) const;

  // L(w) = E_𝒟 ℓ(w; z). Closed form where one exists, otherwise quadrature
  // (absolute tolerance 1e-8) and expected_loss_is_quadrature() is true.
  double expected_loss(std::span<const double> w) const;
  bool expected_loss_is_quadrature() const { return family_ == LossFamily::SmoothedDoubleWell; }
  // Independent quadrature evaluation of L(w) for d <= 2.
  double expected_loss_by_quadrature(std::span<const double> w) const;
  double min_expected_loss() const;

  // Unchecked kernels used by the hot loops; w and z have length d.
  double loss_unchecked(const double* w, const double* z) const;
  void grad_accumulate(const double* w, const double* z, double weight, double* out) const;

  bool operator==(const LossModel&) const = default;

 private:
  LossModel(LossFamily family, std::size_t d, std::vector<double> params, DataDistribution dist);
  void check_dim(std::span<const double> v, const char* what) const;

  LossFamily family_{};
  std::size_t d_ = 0;
  std::vector<double> params_;
  DataDistribution dist_;
  RegularityConstants constants_;
};

SampleSet draw_sample_set(const LossModel& model, std::size_t n, std::uint64_t seed);
void validate_sample(const LossModel& model, const SampleSet& S);

double empirical_loss(const LossModel& model, std::span<const double> w, const SampleSet& S);
void empirical_grad(const LossModel& model, std::span<const double> w, const SampleSet& S,
                    std::span<double> out);
std::vector<double> empirical_grad(const LossModel& model, std::span<const double> w, const SampleSet& S);

struct RegularityReport {
  double m_emp = 0.0;  // largest m compatible with the declared b on the probes
  double b_emp = 0.0;  // smallest b compatible with the declared m on the probes
  double M_emp = 0.0;
  double A_emp = 0.0;
  double B_emp = 0.0;
  std::size_t probes = 0;
  std::size_t violations = 0;
  std::string first_violation;
  bool pass = true;
};

RegularityReport verify_regularity(const LossModel& model, std::size_t probe_count, std::uint64_t seed);

// Both inequalities of the dissipative sandwich for F = L_n, probed at random
// (x, c). Margins are (rhs - lhs) / max(1, |lhs|, |rhs|).
struct SandwichReport {
  double min_lower_margin = 0.0;
  double min_upper_margin = 0.0;
  std::size_t probes = 0;
  bool pass = true;
};
SandwichReport check_dissipative_sandwich(const LossModel& model, const SampleSet& S,
                                          std::size_t probes, std::uint64_t seed,
                                          double tolerance = 1e-9);

}  // namespace sgld
