#pragma once

#include <cmath>
#include <cstddef>
#include <json.hpp>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "sgld/loss_models.hpp"
#include "sgld/schedules.hpp"

namespace sgld {

struct LyapunovConstants {
  double lambda = 0.0;  // λ(p) = m p / 2
  double C = 0.0;       // C(p) = λ(p) {(2/m)((d+p-2)/γ0 + b)}^{p/2}
};
LyapunovConstants lyapunov_constants(double m, double b, std::size_t d, double gamma0, double p);

// e^{-λt} E‖Z_0‖^p + (C/λ)(1 - e^{-λt}).
double moment_bound(const LyapunovConstants& lc, double initial_moment, double t);

double r0_tilde(double M, double F0, double grad_F0_sq, double delta);
double beta_threshold(double M, std::size_t d, double m, double b);
double r1_tilde(double m, double M, double b, double F0, double grad_F0_sq, double inf_F, double r0, double delta);
double epsilon_of(double m, double M, double b, double grad_F0_sq, double inf_F, double r1);

struct LevelThresholds {
  double F0 = 0.0;
  double grad_F0_sq = 0.0;
  double r0_tilde = 0.0;
  double beta_threshold = 0.0;
};
// F = L_n.
LevelThresholds level_thresholds(const LossModel& model, const SampleSet& S, double delta);
double r1_threshold(const LossModel& model, const SampleSet& S, double inf_F, double r0, double delta);
double epsilon_of(const LossModel& model, const SampleSet& S, double inf_F, double r1);

struct CouplingInputs {
  double m = 0.0;
  double b = 0.0;
  double M = 0.0;
  std::size_t d = 1;
  double gamma0 = 1.0;
  double gamma_t = 1.0;
};

// Constants and functions of the contraction argument at a fixed time t.
// All integrals of φ^{-1} are evaluated in the log domain.
class CouplingConstants {
 public:
  explicit CouplingConstants(const CouplingInputs& in);

  const CouplingInputs& inputs() const { return in_; }
  double lambda() const { return lambda_; }
  double C() const { return C_; }
  double R1() const { return R1_; }
  double R2() const { return R2_; }
  double kappa() const { return kappa_; }
  double Q() const { return Q_; }
  double zeta() const { return std::exp(-log_J_R2_); }
  double xi() const { return R1_ > 0.0 ? std::exp(-log_J_R1_) : std::numeric_limits<double>::infinity(); }
  double log_zeta() const { return -log_J_R2_; }
  double c() const;
  bool degenerate() const { return R1_ == 0.0; }

  double psi(double r) const;        // -log φ(r)
  double phi(double r) const;        // φ(r)
  double Phi(double r) const;        // ∫_0^r φ
  double log_I(double r) const;      // log(Φ(r)/φ(r))
  double log_J(double r) const;      // log ∫_0^r Φ/φ
  double g(double r) const;
  double f(double r) const;
  double U(std::span<const double> x, std::span<const double> y) const;
  double rho2(std::span<const double> x, std::span<const double> y) const;

 private:
  CouplingInputs in_;
  double lambda_ = 0.0, C_ = 0.0, R1_ = 0.0, R2_ = 0.0, kappa_ = 0.5, Q_ = 0.0;
  double log_J_R1_ = 0.0, log_J_R2_ = 0.0;
};

CouplingInputs coupling_inputs(const RegularityConstants& c, std::size_t d, const Schedule& schedule, double t);

struct CoveringBound {
  double rademacher = 0.0;  // bound on the empirical Rademacher complexity
  double gap = 0.0;         // 4 x rademacher
};
CoveringBound covering_gen_bound(double A, double B, double M, std::size_t d, double R, double n);
CoveringBound covering_gen_bound(const LossModel& model, double R, double n);
// inf over ε > 0 of ε + c sqrt(2 log N(ε) / n), N(ε) = (R sqrt(d)(A+MR)/ε + 1)^d.
double covering_theorem_value(double A, double B, double M, std::size_t d, double R, double n);

enum class TheoremShape { Thm1, Thm2 };
struct ShapeParams {
  double n = 1.0;  // +inf drops the sample-size term
  double x0_norm = 0.0;
  double beta = 1.0;
  double t = 0.0;
  double s = 0.0;
};
// Functional shape of the main theorems with user-supplied O/Ω constants:
// thm1 = c0 sqrt(log(n+1)/n) + c1 (1+|x0|^3) exp(-t/e^{c2 β} + c3 β) + c4 (1+|x0|^2) sqrt(log(β+1)/β)
// thm2 = c0 sqrt(log(n+1)/n) + c1 (1+|x0|^4) / (log)^4(s)
// Missing constants default to 1.
double theorem_bound_shape(TheoremShape kind, const ShapeParams& params, std::span<const double> constants);
double iterated_log(double x, int times);

struct BoundReport {
  std::string model;
  RegularityConstants constants;
  std::size_t d = 1;
  double t = 0.0;
  double p = 2.0;
  double delta = 1.0;
  double inf_F = 0.0;
  double gamma0 = 1.0;
  double gamma_t = 1.0;
  LyapunovConstants lyapunov_p;
  CouplingConstants coupling{CouplingInputs{1.0, 1.0, 1.0, 1, 1.0, 1.0}};
  LevelThresholds levels;
  double r1_tilde = 0.0;
  double epsilon = 0.0;

  nlohmann::json to_json() const;
};

// r̃₀ = r̃₀(δ), r̃₁ = r̃₁(r̃₀, δ), ε = ε(r̃₁), all with F = L_n.
BoundReport make_bound_report(const LossModel& model, const SampleSet& S, const Schedule& schedule, double t,
                              double p, double delta, double inf_F);

}  // namespace sgld
