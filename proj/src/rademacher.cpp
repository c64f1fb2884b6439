#include "sgld/rademacher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sgld/dynamics.hpp"
#include "sgld/errors.hpp"
#include "sgld/random.hpp"

namespace sgld {

namespace {

constexpr std::size_t kMatrixLimit = std::size_t{1} << 24;
constexpr std::size_t kAscentIterations = 2000;

std::vector<double> ball_grid(std::size_t d, double R, std::size_t G) {
  const double h = R / static_cast<double>(G);
  const long long g = static_cast<long long>(G);
  std::vector<double> pts;
  if (d == 1) {
    for (long long i = -g; i <= g; ++i) pts.push_back(static_cast<double>(i) * h);
  } else {
    for (long long i = -g; i <= g; ++i)
      for (long long j = -g; j <= g; ++j)
        if (i * i + j * j <= g * g) {
          pts.push_back(static_cast<double>(i) * h);
          pts.push_back(static_cast<double>(j) * h);
        }
  }
  return pts;
}

void project_to_ball(std::span<double> w, double R) {
  double s = 0.0;
  for (double v : w) s += v * v;
  const double r = std::sqrt(s);
  if (r > R) {
    for (double& v : w) v *= R / r;
  }
}

double signed_sum(const LossModel& model, const SampleSet& S, const std::vector<double>& sigma, const double* w) {
  double acc = 0.0;
  for (std::size_t i = 0; i < S.n; ++i) acc += sigma[i] * model.loss_unchecked(w, S.points.data() + i * S.d);
  return acc;
}

double ascent_sup(const LossModel& model, const SampleSet& S, const std::vector<double>& sigma, double R,
                  std::size_t starts, std::uint64_t seed) {
  const std::size_t d = S.d;
  const double step = 1.0 / std::max(model.constants().M, 1e-12);
  const double inv_n = 1.0 / static_cast<double>(S.n);
  GaussianSource rng(seed);
  double best = -std::numeric_limits<double>::infinity();
  std::vector<double> w(d), g(d), prev(d);
  for (std::size_t s = 0; s <= starts; ++s) {
    if (s == 0) {
      std::fill(w.begin(), w.end(), 0.0);
    } else {
      rng.fill(w);
      double norm = 0.0;
      for (double v : w) norm += v * v;
      norm = std::sqrt(norm);
      const double radius = R * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
      for (double& v : w) v *= norm > 0.0 ? radius / norm : 0.0;
    }
    for (std::size_t it = 0; it < kAscentIterations; ++it) {
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t i = 0; i < S.n; ++i)
        model.grad_accumulate(w.data(), S.points.data() + i * d, sigma[i] * inv_n, g.data());
      prev = w;
      for (std::size_t j = 0; j < d; ++j) w[j] += step * g[j];
      project_to_ball(w, R);
      double move = 0.0;
      for (std::size_t j = 0; j < d; ++j) move += (w[j] - prev[j]) * (w[j] - prev[j]);
      if (std::sqrt(move) < 1e-12 * std::max(1.0, R)) break;
    }
    best = std::max(best, signed_sum(model, S, sigma, w.data()));
  }
  return best;
}

}  // namespace

std::string_view to_string(SupOptimizer o) { return o == SupOptimizer::Grid ? "grid" : "multi-start-ascent"; }

SupOptimizer parse_sup_optimizer(std::string_view name) {
  if (name == "grid") return SupOptimizer::Grid;
  if (name == "multi-start-ascent") return SupOptimizer::MultiStartAscent;
  throw UsageError("unknown optimizer '" + std::string(name) + "' (expected grid | multi-start-ascent)");
}

std::vector<double> rademacher_signs(std::size_t n, std::uint64_t seed, std::size_t k) {
  std::mt19937_64 eng(derive_seed(seed, k));
  std::vector<double> sigma(n);
  for (std::size_t i = 0; i < n; ++i) sigma[i] = (eng() >> 63) ? 1.0 : -1.0;
  return sigma;
}

RademacherEstimate empirical_rademacher(const LossModel& model, const SampleSet& S, const RademacherOptions& opts) {
  validate_sample(model, S);
  if (!(opts.R >= 0.0) || !std::isfinite(opts.R)) throw UsageError("R must be >= 0");
  if (opts.K < 1) throw UsageError("K must be >= 1");
  if (S.n == 0) throw UsageError("empty sample set");
  const std::size_t d = S.d;
  if (opts.optimizer == SupOptimizer::Grid && d > 2) throw UsageError("grid optimizer requires d <= 2");
  if (opts.grid_per_radius == 0) throw UsageError("grid_per_radius must be >= 1");

  RademacherEstimate est;
  est.R = opts.R;
  est.n = S.n;
  est.K = opts.K;
  est.optimizer = opts.optimizer;
  est.seed = opts.seed;
  est.per_draw_sup.assign(opts.K, 0.0);
  const double sign = opts.negate_signs ? -1.0 : 1.0;
  const auto& c = model.constants();

  if (opts.optimizer == SupOptimizer::Grid) {
    const std::vector<double> pts =
        opts.R == 0.0 ? std::vector<double>(d, 0.0) : ball_grid(d, opts.R, opts.grid_per_radius);
    const std::size_t P = pts.size() / d;
    std::vector<double> table;
    if (P * S.n <= kMatrixLimit) {
      table.resize(P * S.n);
      for_each_index(P, opts.policy, [&](std::size_t p) {
        for (std::size_t i = 0; i < S.n; ++i)
          table[p * S.n + i] = model.loss_unchecked(pts.data() + p * d, S.points.data() + i * d);
      });
    }
    for_each_index(opts.K, opts.policy, [&](std::size_t k) {
      auto sigma = rademacher_signs(S.n, opts.seed, k);
      for (double& s : sigma) s *= sign;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t p = 0; p < P; ++p) {
        double acc = 0.0;
        if (!table.empty()) {
          const double* row = table.data() + p * S.n;
          for (std::size_t i = 0; i < S.n; ++i) acc += sigma[i] * row[i];
        } else {
          acc = signed_sum(model, S, sigma, pts.data() + p * d);
        }
        best = std::max(best, acc);
      }
      est.per_draw_sup[k] = best;
    });
    est.resolution_error =
        (c.A + c.M * opts.R) * opts.R * std::sqrt(static_cast<double>(d)) / static_cast<double>(opts.grid_per_radius);
  } else {
    for_each_index(opts.K, opts.policy, [&](std::size_t k) {
      auto sigma = rademacher_signs(S.n, opts.seed, k);
      for (double& s : sigma) s *= sign;
      est.per_draw_sup[k] =
          ascent_sup(model, S, sigma, opts.R, opts.starts, derive_seed(derive_seed(opts.seed, k), 1));
    });
    est.resolution_error = std::numeric_limits<double>::quiet_NaN();
    est.lower_bound = true;
  }

  std::vector<double> scaled(est.per_draw_sup);
  for (double& v : scaled) v /= static_cast<double>(S.n);
  est.ci = bootstrap_mean_ci(scaled, opts.resamples, derive_seed(opts.seed, 0xB007));
  est.estimate = est.ci.value;
  return est;
}

CoveringCount covering_number_ball(std::size_t d, double R, double delta) {
  if (!(delta > 0.0) || !(R >= 0.0)) throw UsageError("covering number needs delta > 0 and R >= 0");
  CoveringCount cc;
  const double base = R * std::sqrt(static_cast<double>(d)) / delta + 1.0;
  cc.log_value = static_cast<double>(d) * std::log(base);
  if (cc.log_value >= 63.0 * std::log(2.0)) {
    cc.saturated = true;
    cc.count = std::numeric_limits<std::uint64_t>::max();
  } else {
    // Guard against pow rounding just above an integer.
    const double v = std::pow(base, static_cast<double>(d));
    const double r = std::round(v);
    cc.count = static_cast<std::uint64_t>(std::abs(v - r) <= 1e-9 * r ? r : std::ceil(v));
  }
  return cc;
}

double rademacher_ball_radius(double m, double b) {
  if (!(m > 0.0) || !(b >= 0.0)) throw UsageError("ball radius needs m > 0, b >= 0");
  return std::sqrt(2.0 / m * (2.0 + b * std::log(2.0)));
}

GenGapPoint gen_gap_for_draws(const LossModel& model, std::span<const SampleSet> draws, const GenGapConfig& cfg,
                              std::uint64_t seed) {
  if (draws.empty()) throw UsageError("gen-gap needs at least one sample-set draw");
  if (cfg.replicas == 0) throw UsageError("gen-gap needs replicas >= 1");
  const std::size_t d = model.dimension();
  std::vector<double> x0 = cfg.x0.empty() ? std::vector<double>(d, 0.0) : cfg.x0;
  GenGapPoint pt;
  pt.n = draws.front().n;
  pt.seed = seed;
  pt.overlay = std::sqrt(std::log(static_cast<double>(pt.n) + 1) / static_cast<double>(pt.n));
  const Schedule schedule = Schedule::constant(cfg.beta);
  for (std::size_t j = 0; j < draws.size(); ++j) {
    const SampleSet& S = draws[j];
    SdeOptions o;
    o.t_end = cfg.t;
    o.replicas = cfg.replicas;
    o.noise.seed = derive_seed(seed, j);
    o.noise.step = cfg.step;
    o.policy = cfg.policy;
    const auto ens = run_sde(model, S, Process::SgldContinuous, x0, schedule, o);
    const std::size_t last = ens.times.size() - 1;
    std::vector<double> gaps(cfg.replicas);
    for_each_index(cfg.replicas, cfg.policy, [&](std::size_t r) {
      const auto x = ens.state(r, last);
      gaps[r] = model.expected_loss(x) - empirical_loss(model, x, S);
    });
    pt.per_draw_gap.push_back(mean(gaps));
  }
  pt.signed_gap = mean_ci(pt.per_draw_gap);
  std::vector<double> abs_gap(pt.per_draw_gap);
  for (double& v : abs_gap) v = std::abs(v);
  pt.abs_gap = bootstrap_mean_ci(abs_gap, 1000, derive_seed(seed, 0xB007));
  return pt;
}

std::vector<GenGapPoint> gen_gap_estimate(const LossModel& model, const GenGapConfig& cfg) {
  if (cfg.sample_sizes.empty()) throw UsageError("gen-gap needs sample sizes");
  std::vector<GenGapPoint> out;
  for (std::size_t n : cfg.sample_sizes) {
    const std::uint64_t s = derive_seed(cfg.seed, n);
    std::vector<SampleSet> draws;
    draws.reserve(cfg.draws);
    for (std::size_t j = 0; j < cfg.draws; ++j) draws.push_back(draw_sample_set(model, n, derive_seed(s, j)));
    out.push_back(gen_gap_for_draws(model, draws, cfg, derive_seed(s, 0x5DE)));
  }
  return out;
}

}  // namespace sgld
