#include "sgld/bounds.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "sgld/errors.hpp"
#include "sgld/quadrature.hpp"

namespace sgld {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInnerTol = 1e-13;
constexpr double kOuterTol = 1e-12;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw UsageError(std::string(name) + " must be positive and finite");
}

// log(e^x - 1 - x) for x > 0 without cancellation.
double log_expm1_minus(double x) {
  if (x < 1e-3) return std::log(x * x / 2 * (1 + x / 3 + x * x / 12));
  if (x > 30) return x + std::log1p(-(1 + x) * std::exp(-x));
  return std::log(std::expm1(x) - x);
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

}  // namespace

LyapunovConstants lyapunov_constants(double m, double b, std::size_t d, double gamma0, double p) {
  require_positive(m, "m");
  require_positive(gamma0, "gamma0");
  if (!(b >= 0.0)) throw UsageError("b must be non-negative");
  if (!(p >= 2.0)) throw UsageError("p must be >= 2");
  const double lambda = m * p / 2;
  const double base = (2.0 / m) * ((static_cast<double>(d) + p - 2) / gamma0 + b);
  return {lambda, lambda * std::pow(base, p / 2)};
}

double moment_bound(const LyapunovConstants& lc, double initial_moment, double t) {
  const double decay = std::exp(-lc.lambda * t);
  return decay * initial_moment + lc.C / lc.lambda * (1 - decay);
}

double r0_tilde(double M, double F0, double grad_F0_sq, double delta) {
  if (delta < 0.0) throw UsageError("delta must be >= 0");
  return (M + 1) / 2 * delta + F0 + 0.5 * grad_F0_sq;
}

double beta_threshold(double M, std::size_t d, double m, double b) {
  require_positive(m, "m");
  require_positive(b, "b");
  return 4 * M * static_cast<double>(d) / (m * b);
}

double r1_tilde(double m, double M, double b, double F0, double grad_F0_sq, double inf_F, double r0, double delta) {
  require_positive(m, "m");
  return F0 + 0.5 * grad_F0_sq + 4 * (M + 1) / m * (r0 + m * delta * delta / 4 + 0.5 * b * std::log(2.0) - inf_F);
}

double epsilon_of(double m, double M, double b, double grad_F0_sq, double inf_F, double r1) {
  require_positive(m, "m");
  const double brace = grad_F0_sq + 4 * M * M / m * (r1 + 0.5 * b * std::log(2.0) - inf_F);
  if (!(brace > 0.0)) throw NumericError("epsilon: braced quantity is not positive (degenerate model)");
  return 1.0 / (2 * std::sqrt(2.0)) / std::sqrt(brace);
}

LevelThresholds level_thresholds(const LossModel& model, const SampleSet& S, double delta) {
  const std::vector<double> zero(model.dimension(), 0.0);
  const auto& c = model.constants();
  LevelThresholds lt;
  lt.F0 = empirical_loss(model, zero, S);
  const auto g0 = empirical_grad(model, zero, S);
  lt.grad_F0_sq = norm2(g0);
  lt.r0_tilde = r0_tilde(c.M, lt.F0, lt.grad_F0_sq, delta);
  lt.beta_threshold = c.b > 0.0 ? beta_threshold(c.M, model.dimension(), c.m, c.b) : kInf;
  return lt;
}

double r1_threshold(const LossModel& model, const SampleSet& S, double inf_F, double r0, double delta) {
  const auto lt = level_thresholds(model, S, 0.0);
  const auto& c = model.constants();
  return r1_tilde(c.m, c.M, c.b, lt.F0, lt.grad_F0_sq, inf_F, r0, delta);
}

double epsilon_of(const LossModel& model, const SampleSet& S, double inf_F, double r1) {
  const auto lt = level_thresholds(model, S, 0.0);
  const auto& c = model.constants();
  return epsilon_of(c.m, c.M, c.b, lt.grad_F0_sq, inf_F, r1);
}

CouplingConstants::CouplingConstants(const CouplingInputs& in) : in_(in) {
  require_positive(in.m, "m");
  require_positive(in.M, "M");
  require_positive(in.gamma0, "gamma0");
  require_positive(in.gamma_t, "gamma(t)");
  if (!(in.b >= 0.0)) throw UsageError("b must be non-negative");
  const auto lc = lyapunov_constants(in.m, in.b, in.d, in.gamma0, 2.0);
  lambda_ = lc.lambda;
  C_ = lc.C + lc.lambda;
  const double s1 = 2 * C_ / lambda_ - 2;
  const double s2 = 4 * C_ * (1 + 1 / lambda_) - 2;
  R1_ = s1 > 0.0 ? 2 * std::sqrt(s1) : 0.0;
  R2_ = 2 * std::sqrt(std::max(s2, 0.0));
  if (R1_ > 0.0) {
    const double log_second = std::log(2.0) - std::log(C_ * in.gamma_t) - log_expm1_minus(2 * R1_) -
                              in.M * in.gamma_t / 8 * R1_ * R1_;
    kappa_ = std::min(0.5, std::exp(log_second));
    if (!(kappa_ > 0.0)) {
      std::ostringstream os;
      os << "kappa_t underflows (log value " << log_second << ")";
      throw NumericError(os.str());
    }
  }
  Q_ = 2 * std::sqrt(kappa_ - kappa_ * kappa_);
  log_J_R2_ = log_J(R2_);
  log_J_R1_ = R1_ > 0.0 ? log_J(R1_) : -kInf;
}

double CouplingConstants::c() const {
  return std::min({zeta() / in_.gamma_t, lambda_ / 2, 2 * C_ * lambda_ * kappa_});
}

double CouplingConstants::psi(double r) const { return in_.M * in_.gamma_t / 8 * r * r + 2 * Q_ * r; }

double CouplingConstants::phi(double r) const { return std::exp(-psi(r)); }

double CouplingConstants::Phi(double r) const {
  if (r <= 0.0) return 0.0;
  return integrate([&](double s) { return phi(s); }, 0.0, r, kInnerTol, 0.0, "Phi").value;
}

double CouplingConstants::log_I(double r) const {
  if (r <= 0.0) return -kInf;
  return psi(r) + std::log(Phi(r));
}

double CouplingConstants::log_J(double r) const {
  if (r <= 0.0) return -kInf;
  const double top = log_I(r);
  auto scaled = [&](double u) { return std::exp(log_I(u) - top); };
  const double v = integrate(scaled, 0.0, r, kOuterTol, 0.0, "J").value;
  return top + std::log(v);
}

double CouplingConstants::g(double r) const {
  if (r <= 0.0) return 1.0;
  const double a = std::min(r, R2_);
  const double la = log_J(a);
  const double term2 = std::exp(la - log_J_R2_);
  double term1;
  if (R1_ == 0.0) {
    term1 = 1.0;  // ξ J(min(r, R1)) → 1 as R1 → 0 for r > 0
  } else {
    term1 = r < R1_ ? std::exp(la - log_J_R1_) : 1.0;
  }
  return 1.0 - 0.25 * term2 - 0.25 * term1;
}

double CouplingConstants::f(double r) const {
  if (r < 0.0) return r;
  const double top = std::min(r, R2_);
  if (top == 0.0) return 0.0;
  auto integrand = [&](double s) { return phi(s) * g(s); };
  // g has a kink at R1.
  if (R1_ > 0.0 && R1_ < top) {
    return integrate(integrand, 0.0, R1_, kOuterTol, 0.0, "f").value +
           integrate(integrand, R1_, top, kOuterTol, 0.0, "f").value;
  }
  return integrate(integrand, 0.0, top, kOuterTol, 0.0, "f").value;
}

double CouplingConstants::U(std::span<const double> x, std::span<const double> y) const {
  return 1 + kappa_ * (2 + norm2(x) + norm2(y));
}

double CouplingConstants::rho2(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != y.size()) throw UsageError("rho2 arguments differ in dimension");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return f(std::sqrt(s)) * U(x, y);
}

CouplingInputs coupling_inputs(const RegularityConstants& c, std::size_t d, const Schedule& schedule, double t) {
  return {c.m, c.b, c.M, d, schedule.gamma0(), schedule.gamma(t)};
}

CoveringBound covering_gen_bound(double A, double B, double M, std::size_t d, double R, double n) {
  require_positive(n, "n");
  if (R < 0.0 || A < 0.0 || B < 0.0 || M < 0.0) throw UsageError("covering bound inputs must be non-negative");
  const double lip = A + M * R;
  const double dd = static_cast<double>(d);
  const double rad = 1 / n + (B + lip * R) * std::sqrt(2 * dd * std::log(n * R * lip * std::sqrt(dd) + 1) / n);
  return {rad, 4 * rad};
}

CoveringBound covering_gen_bound(const LossModel& model, double R, double n) {
  const auto& c = model.constants();
  return covering_gen_bound(c.A, c.B, c.M, model.dimension(), R, n);
}

double covering_theorem_value(double A, double B, double M, std::size_t d, double R, double n) {
  require_positive(n, "n");
  const double lip = A + M * R;
  const double K = R * std::sqrt(static_cast<double>(d)) * lip;
  const double c = B + lip * R;
  if (K == 0.0 || c == 0.0) return 0.0;
  const double dd = static_cast<double>(d);
  auto h = [&](double u) {
    const double eps = std::exp(u);
    return eps + c * std::sqrt(2 * dd * std::log(K / eps + 1) / n);
  };
  const double hi = std::log(covering_gen_bound(A, B, M, d, R, n).rademacher);
  const double lo = hi - 80.0;
  constexpr int kScan = 400;
  double best_u = -std::log(n), best = h(best_u);
  for (int i = 0; i <= kScan; ++i) {
    const double u = lo + (hi - lo) * i / kScan;
    const double v = h(u);
    if (v < best) best = v, best_u = u;
  }
  const double step = (hi - lo) / kScan;
  const auto r = boost::math::tools::brent_find_minima(h, best_u - step, best_u + step, 52);
  return std::min(best, r.second);
}

double iterated_log(double x, int times) {
  for (int i = 0; i < times; ++i) {
    if (!(x > 0.0)) throw UsageError("iterated log of a non-positive value");
    x = std::log(x);
  }
  return x;
}

double theorem_bound_shape(TheoremShape kind, const ShapeParams& p, std::span<const double> constants) {
  auto k = [&](std::size_t i) { return i < constants.size() ? constants[i] : 1.0; };
  const double sample_term = std::isinf(p.n) ? 0.0 : std::sqrt(std::log(p.n + 1) / p.n);
  if (kind == TheoremShape::Thm1) {
    require_positive(p.beta, "beta");
    const double x3 = 1 + std::pow(p.x0_norm, 3);
    const double x2 = 1 + p.x0_norm * p.x0_norm;
    return k(0) * sample_term + k(1) * x3 * std::exp(-p.t / std::exp(k(2) * p.beta) + k(3) * p.beta) +
           k(4) * x2 * std::sqrt(std::log(p.beta + 1) / p.beta);
  }
  const double l4 = std::log(std::log(std::log(std::log(p.s > 0.0 ? p.s : 0.0))));
  if (!(p.s > 0.0) || !(l4 > 0.0) || !std::isfinite(l4)) {
    throw UsageError("thm2 shape needs s > e^{e^e} so that (log)^4(s) > 0");
  }
  return k(0) * sample_term + k(1) * (1 + std::pow(p.x0_norm, 4)) / l4;
}

BoundReport make_bound_report(const LossModel& model, const SampleSet& S, const Schedule& schedule, double t,
                              double p, double delta, double inf_F) {
  BoundReport r;
  const auto& c = model.constants();
  r.model = model.describe();
  r.constants = c;
  r.d = model.dimension();
  r.t = t;
  r.p = p;
  r.delta = delta;
  r.inf_F = inf_F;
  r.gamma0 = schedule.gamma0();
  r.gamma_t = schedule.gamma(t);
  r.lyapunov_p = lyapunov_constants(c.m, c.b, r.d, r.gamma0, p);
  r.coupling = CouplingConstants(coupling_inputs(c, r.d, schedule, t));
  r.levels = level_thresholds(model, S, delta);
  r.r1_tilde = r1_tilde(c.m, c.M, c.b, r.levels.F0, r.levels.grad_F0_sq, inf_F, r.levels.r0_tilde, delta);
  r.epsilon = epsilon_of(c.m, c.M, c.b, r.levels.grad_F0_sq, inf_F, r.r1_tilde);
  return r;
}

nlohmann::json BoundReport::to_json() const {
  using nlohmann::json;
  auto entry = [](double v, const char* formula) {
    json e;
    e["value"] = std::isfinite(v) ? json(v) : json(nullptr);
    e["formula"] = formula;
    return e;
  };
  const auto& k = coupling;
  json j;
  j["inputs"] = {{"model", model},
                 {"m", constants.m},
                 {"b", constants.b},
                 {"M", constants.M},
                 {"A", constants.A},
                 {"B", constants.B},
                 {"d", d},
                 {"t", t},
                 {"p", p},
                 {"delta", delta},
                 {"inf_F", inf_F},
                 {"gamma0", gamma0},
                 {"gamma_t", gamma_t}};
  json c;
  c["lambda_p"] = entry(lyapunov_p.lambda, "lambda(p) = m p / 2");
  c["C_p"] = entry(lyapunov_p.C, "C(p) = lambda(p) * ((2/m) * ((d + p - 2)/gamma(0) + b))^(p/2)");
  c["lambda"] = entry(k.lambda(), "lambda = lambda(2)");
  c["C"] = entry(k.C(), "C = C(2) + lambda(2)");
  c["R1"] = entry(k.R1(), "R1 = 2 sqrt(2 C / lambda - 2), 0 if the radicand is negative");
  c["R2"] = entry(k.R2(), "R2 = 2 sqrt(4 C (1 + 1/lambda) - 2)");
  c["kappa_t"] = entry(k.kappa(), "kappa_t = min(1/2, 2 exp(-M gamma(t) R1^2 / 8) / (C gamma(t) (e^(2 R1) - 1 - 2 R1)))");
  c["Q"] = entry(k.Q(), "Q = 2 sqrt(kappa_t - kappa_t^2)");
  c["zeta_t"] = entry(k.zeta(), "1/zeta_t = integral_0^R2 Phi_t(s) / phi_t(s) ds");
  c["xi_t"] = entry(k.xi(), "1/xi_t = integral_0^R1 Phi_t(s) / phi_t(s) ds");
  c["c_t"] = entry(k.c(), "c_t = min(zeta_t / gamma(t), lambda / 2, 2 C lambda kappa_t)");
  c["r0_tilde"] = entry(levels.r0_tilde, "r0~(delta) = (M + 1) delta / 2 + F(0) + |grad F(0)|^2 / 2");
  c["beta_threshold"] = entry(levels.beta_threshold, "beta >= 4 M d / (m b)");
  c["r1_tilde"] = entry(r1_tilde, "r1~ = F(0) + |grad F(0)|^2/2 + (4 (M+1)/m)(r0 + m delta^2/4 + b log(2)/2 - inf F), r0 = r0~(delta)");
  c["epsilon"] = entry(epsilon, "epsilon = (1/(2 sqrt 2)) (|grad F(0)|^2 + (4 M^2/m)(r1 + b log(2)/2 - inf F))^(-1/2), r1 = r1~");
  j["constants"] = c;
  j["degenerate_R1"] = k.degenerate();
  j["log_zeta_t"] = k.log_zeta();
  return j;
}

}  // namespace sgld
