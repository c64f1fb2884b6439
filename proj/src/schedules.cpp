#include "sgld/schedules.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "sgld/errors.hpp"
#include "sgld/quadrature.hpp"

namespace sgld {

double default_schedule_offset() { return std::exp(std::exp(std::numbers::e)); }

Schedule Schedule::iterated_log(double offset) {
  if (!(std::log(std::log(offset)) > 0.0)) {
    throw UsageError("schedule offset must exceed e^e so that gamma(0) > 0");
  }
  return Schedule(false, offset, 0.0);
}

Schedule Schedule::constant(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw UsageError("constant gamma must be positive and finite");
  return Schedule(true, 0.0, gamma);
}

double Schedule::gamma(double t) const {
  if (t < 0.0) throw UsageError("gamma(t) needs t >= 0");
  if (constant_) return value_;
  return std::log(std::log(std::log(t + offset_)));
}

std::string Schedule::describe() const {
  std::ostringstream os;
  os.precision(17);
  if (constant_) {
    os << "constant(gamma=" << value_ << ")";
  } else {
    os << "iterated-log(offset=" << offset_ << ")";
  }
  return os.str();
}

double step_size(std::size_t k) {
  if (k == 0) throw UsageError("step index starts at 1");
  return 1.0 / static_cast<double>(k);
}

double grid_time(std::size_t k) {
  if (k <= 64) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) s += 1.0 / static_cast<double>(j);
    return s;
  }
  return boost::math::digamma(static_cast<double>(k) + 1.0) + std::numbers::egamma;
}

std::size_t grid_index(double t) {
  if (t <= 1.0) return 0;
  // T_k ≈ log k + γ_E, then correct by local search.
  auto k = static_cast<std::size_t>(std::max(1.0, std::floor(std::exp(t - std::numbers::egamma))));
  while (k > 1 && grid_time(k) >= t) --k;
  while (grid_time(k + 1) < t) ++k;
  return k;
}

double frozen_time(double t) {
  if (t < 0.0) throw UsageError("phi(t) needs t >= 0");
  const std::size_t k = grid_index(t);
  return k == 0 ? 0.0 : grid_time(k);
}

double noise_variance_integral(const Schedule& s, double a, double b) {
  if (s.is_constant()) return 2.0 * (b - a) / s.constant_value();
  auto f = [&](double u) { return 2.0 / s.gamma(u); };
  return integrate(f, a, b, 1e-13, 1e-12, "noise variance integral").value;
}

double eta_tilde(const Schedule& s, std::size_t k) {
  if (k == 0) throw UsageError("eta_tilde index starts at 1");
  return noise_variance_integral(s, grid_time(k), grid_time(k + 1));
}

double time_change_integral(const Schedule& s, double from, double to) {
  if (s.is_constant()) return to - from;
  const double gs = s.gamma(from);
  auto f = [&](double u) { return gs / s.gamma(u); };
  return integrate(f, from, to, 1e-14, 0.0, "time change integral").value;
}

double time_change(const Schedule& s, double start, double duration) {
  if (start < 0.0 || duration < 0.0) throw UsageError("alpha(s, t) needs s, t >= 0");
  if (duration == 0.0) return start;
  auto G = [&](double r) { return time_change_integral(s, start, r) - duration; };
  double lo = start + duration;
  const double glo = G(lo);
  if (glo >= 0.0) return lo;  // γ constant on [s, s+t]
  double hi = start + 2 * duration;
  double ghi = G(hi);
  int expansions = 0;
  while (ghi < 0.0) {
    if (++expansions > 200) throw NumericError("alpha: bracket expansion did not reach the root");
    lo = hi;
    hi = start + 2 * (hi - start);
    ghi = G(hi);
  }
  if (ghi == 0.0) return hi;
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(a)); };
  auto [a, b] = boost::math::tools::toms748_solve(G, lo, hi, G(lo), ghi, tol, iters);
  const double r = 0.5 * (a + b);
  const double residual = std::abs(G(r));
  if (residual > 1e-8 * std::max(1.0, duration)) {
    std::ostringstream os;
    os << "alpha(" << start << ", " << duration << "): residual " << residual << " after " << iters
       << " iterations";
    throw NumericError(os.str());
  }
  return r;
}

}  // namespace sgld
