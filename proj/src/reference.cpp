#include "sgld/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sgld/errors.hpp"
#include "sgld/random.hpp"

namespace sgld {

namespace {

struct GridSums {
  double z = 0.0;    // Σ w e^{-β(F - Fs)}
  double obs = 0.0;  // Σ w obs e^{...}
  double abs = 0.0;  // Σ w |obs| e^{...}
};

double trapezoid_weight(std::size_t i, std::size_t N) { return (i == 0 || i + 1 == N) ? 0.5 : 1.0; }

// Log of the mass of e^{-β(F - inf F)} outside the ball of radius R, using the
// sandwich with c = 1/2: F(x) - inf F >= (3/8) m ‖x‖² - b log 2.
double log_tail_bound(const GibbsSpec& s, double R) {
  const double a = 3.0 * s.beta * s.m / 8.0;
  const double pre = s.beta * s.b * std::log(2.0);
  if (s.d == 1) return pre + 0.5 * std::log(std::numbers::pi / a) + std::log(std::erfc(std::sqrt(a) * R));
  return pre + std::log(std::numbers::pi / a) - a * R * R;
}

GridSums grid_sums(const GibbsSpec& s, const ScalarField& obs, double R, std::size_t N, double shift) {
  const double h = 2 * R / static_cast<double>(N - 1);
  std::vector<GridSums> rows(N);
  for_each_index(N, s.policy, [&](std::size_t i) {
    double x[2] = {-R + h * static_cast<double>(i), 0.0};
    GridSums acc;
    const std::size_t inner = s.d == 1 ? 1 : N;
    for (std::size_t j = 0; j < inner; ++j) {
      if (s.d == 2) x[1] = -R + h * static_cast<double>(j);
      const std::span<const double> pt(x, s.d);
      const double w = trapezoid_weight(i, N) * (s.d == 2 ? trapezoid_weight(j, N) : 1.0);
      const double e = w * std::exp(-s.beta * (s.target(pt) - shift));
      if (e == 0.0) continue;
      const double o = obs(pt);
      acc.z += e;
      acc.obs += e * o;
      acc.abs += e * std::abs(o);
    }
    rows[i] = acc;
  });
  GridSums total;
  for (const auto& r : rows) {
    total.z += r.z;
    total.obs += r.obs;
    total.abs += r.abs;
  }
  return total;
}

double coarse_min(const GibbsSpec& s, double R, std::size_t N) {
  std::vector<double> lo(s.d, -R), hi(s.d, R);
  return grid_min(s.target, lo, hi, N - 1, std::numeric_limits<double>::quiet_NaN(), s.policy).value;
}

}  // namespace

GibbsSpec gibbs_spec(const LossModel& model, const SampleSet& S, double beta) {
  validate_sample(model, S);
  GibbsSpec spec;
  spec.beta = beta;
  spec.d = model.dimension();
  spec.m = model.constants().m;
  spec.b = model.constants().b;
  spec.target = [model, S](std::span<const double> w) { return empirical_loss(model, w, S); };
  return spec;
}

GibbsResult gibbs_expectation(const GibbsSpec& s, const ScalarField& observable) {
  if (s.d < 1 || s.d > 2) throw UsageError("gibbs_expectation requires d <= 2");
  if (!(s.beta > 0.0)) throw UsageError("beta must be positive");
  if (!s.target) throw UsageError("gibbs_expectation needs a target");
  if (s.resolution < 256) throw UsageError("resolution must be >= 256 points per axis");
  const bool auto_radius = s.r_trunc <= 0.0;
  if (auto_radius && !(s.m > 0.0)) throw UsageError("automatic truncation needs m > 0");
  const std::size_t N0 = s.resolution | 1;

  double R = s.r_trunc;
  double shift = 0.0;
  if (auto_radius) {
    // Contain every stationary point, then grow until the tail certificate holds.
    R = std::max(1.0, 1.25 * std::sqrt(s.b / s.m));
    for (int iter = 0;; ++iter) {
      shift = coarse_min(s, R, N0);
      const double z = grid_sums(s, [](std::span<const double>) { return 0.0; }, R, N0, shift).z *
                       std::pow(2 * R / static_cast<double>(N0 - 1), static_cast<double>(s.d));
      // inf F <= shift, so z under-states ∫ e^{-β(F - inf F)}; the check is conservative.
      if (log_tail_bound(s, R) <= std::log(s.tail_tol * z)) break;
      if (iter > 200) throw NumericError("gibbs_expectation: truncation radius search did not terminate");
      R *= 1.25;
    }
  } else {
    shift = coarse_min(s, R, N0);
  }

  const std::size_t max_N = s.d == 1 ? (std::size_t{1} << 17) + 1 : 4097;
  GibbsResult res;
  res.r_trunc = R;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t N = N0; N <= max_N; N = 2 * N - 1) {
    const GridSums g = grid_sums(s, observable, R, N, shift);
    if (!(g.z > 0.0) || !std::isfinite(g.z)) throw NumericError("gibbs_expectation: normaliser is not positive");
    const double v = g.obs / g.z;
    const double scale = std::max(std::abs(v), g.abs / g.z);
    res.value = v;
    res.resolution = N;
    if (std::isfinite(prev)) {
      res.rel_change = scale > 0.0 ? std::abs(v - prev) / scale : 0.0;
      if (res.rel_change < s.rel_tol) return res;
    }
    prev = v;
  }
  throw NumericError("gibbs_expectation: relative change " + std::to_string(res.rel_change) + " above tolerance at " +
                     std::to_string(res.resolution) + " points per axis");
}

double ou_second_moment(std::span<const double> x0, double rate, double noise_variance, double t) {
  if (!(rate > 0.0)) throw UsageError("OU rate must be positive");
  if (t < 0.0) throw UsageError("t must be >= 0");
  double x2 = 0.0;
  for (double v : x0) x2 += v * v;
  const double decay = std::exp(-2 * rate * t);
  return decay * x2 + static_cast<double>(x0.size()) * noise_variance / (2 * rate) * (-std::expm1(-2 * rate * t));
}

GridMinResult grid_min(const ScalarField& target, std::span<const double> lo, std::span<const double> hi,
                       std::size_t resolution, double lipschitz, ExecutionPolicy policy) {
  const std::size_t d = lo.size();
  if (d < 1 || d > 2 || hi.size() != d) throw UsageError("grid_min requires a box in d <= 2");
  if (resolution < 1) throw UsageError("grid_min resolution must be >= 1");
  for (std::size_t j = 0; j < d; ++j)
    if (!(hi[j] >= lo[j])) throw UsageError("grid_min box has hi < lo");
  const std::size_t N = resolution + 1;
  std::vector<double> h(d);
  for (std::size_t j = 0; j < d; ++j) h[j] = (hi[j] - lo[j]) / static_cast<double>(resolution);

  struct RowMin {
    double value = std::numeric_limits<double>::infinity();
    std::size_t j = 0;
  };
  std::vector<RowMin> rows(N);
  for_each_index(N, policy, [&](std::size_t i) {
    double x[2] = {lo[0] + h[0] * static_cast<double>(i), 0.0};
    RowMin best;
    const std::size_t inner = d == 1 ? 1 : N;
    for (std::size_t j = 0; j < inner; ++j) {
      if (d == 2) x[1] = lo[1] + h[1] * static_cast<double>(j);
      const double v = target(std::span<const double>(x, d));
      if (v < best.value) best = {v, j};
    }
    rows[i] = best;
  });
  std::size_t bi = 0;
  for (std::size_t i = 1; i < N; ++i)
    if (rows[i].value < rows[bi].value) bi = i;

  GridMinResult res;
  res.evaluations = d == 1 ? N : N * N;
  res.argmin.assign(d, 0.0);
  res.argmin[0] = lo[0] + h[0] * static_cast<double>(bi);
  if (d == 2) res.argmin[1] = lo[1] + h[1] * static_cast<double>(rows[bi].j);
  res.grid_value = rows[bi].value;
  res.value = res.grid_value;
  if (!std::isfinite(res.value)) throw NumericError("grid_min: no finite value on the grid");

  // Pattern-search polish.
  double step = *std::max_element(h.begin(), h.end());
  double extent = 0.0;
  for (std::size_t j = 0; j < d; ++j) extent = std::max({extent, std::abs(lo[j]), std::abs(hi[j])});
  const double floor = 1e-13 * std::max(1.0, extent);
  std::vector<double> trial(d);
  for (std::size_t it = 0; it < 100000 && step > floor; ++it) {
    bool moved = false;
    for (std::size_t j = 0; j < d && !moved; ++j) {
      for (double dir : {-1.0, 1.0}) {
        trial = res.argmin;
        trial[j] = std::clamp(trial[j] + dir * step, lo[j], hi[j]);
        const double v = target(trial);
        ++res.evaluations;
        if (v < res.value) {
          res.value = v;
          res.argmin = trial;
          moved = true;
          break;
        }
      }
    }
    if (!moved) step /= 2;
  }
  if (std::isfinite(lipschitz)) {
    double diag = 0.0;
    for (std::size_t j = 0; j < d; ++j) diag += (hi[j] - lo[j]) * (hi[j] - lo[j]);
    res.certificate = lipschitz * std::sqrt(diag) / static_cast<double>(resolution);
  }
  return res;
}

InfimumResult empirical_loss_infimum(const LossModel& model, const SampleSet& S, std::size_t resolution,
                                     ExecutionPolicy policy) {
  validate_sample(model, S);
  const std::size_t d = model.dimension();
  const auto& c = model.constants();
  InfimumResult out;
  out.box_radius = std::max(std::sqrt(c.b / c.m) * (1 + 1e-9), 1e-6);
  auto F = [&](std::span<const double> w) { return empirical_loss(model, w, S); };
  if (d <= 2) {
    if (resolution == 0) resolution = d == 1 ? 20000 : 1000;
    const std::vector<double> lo(d, -out.box_radius), hi(d, out.box_radius);
    const double lip = c.A + c.M * out.box_radius * std::sqrt(static_cast<double>(d));
    const auto g = grid_min(F, lo, hi, resolution, lip, policy);
    out.value = g.value;
    out.argmin = g.argmin;
    out.certified = true;
    out.certificate = g.certificate;
    out.method = "grid-scan+polish";
    return out;
  }
  // d > 2: multi-start gradient descent; the result only bounds inf L_n from above.
  constexpr std::size_t kStarts = 64, kIters = 5000;
  const double step = 1.0 / std::max(c.M, 1e-12);
  GaussianSource rng(derive_seed(S.seed, 0x1AF));
  out.value = std::numeric_limits<double>::infinity();
  std::vector<double> w(d), g(d);
  for (std::size_t s = 0; s <= kStarts; ++s) {
    if (s == 0) {
      std::fill(w.begin(), w.end(), 0.0);
    } else {
      rng.fill(w);
      for (double& v : w) v *= out.box_radius / std::sqrt(static_cast<double>(d));
    }
    for (std::size_t it = 0; it < kIters; ++it) {
      empirical_grad(model, w, S, g);
      double move = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        w[j] -= step * g[j];
        move += g[j] * g[j];
      }
      if (step * std::sqrt(move) < 1e-13) break;
    }
    const double v = F(w);
    if (v < out.value) {
      out.value = v;
      out.argmin = w;
    }
  }
  out.method = "multi-start-descent (upper bound on inf)";
  return out;
}

}  // namespace sgld
