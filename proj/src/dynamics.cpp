#include "sgld/dynamics.hpp"

#include <algorithm>
#include <array>
#include <iterator>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "sgld/bounds.hpp"
#include "sgld/errors.hpp"

namespace sgld {

std::string_view to_string(ExecutionPolicy policy) {
  return policy == ExecutionPolicy::Serial ? "serial" : "parallel";
}

std::string_view to_string(Process process) {
  switch (process) {
    case Process::SgldDiscrete: return "sgld-discrete";
    case Process::SgldContinuous: return "sgld-continuous";
    case Process::SaContinuous: return "sa-continuous";
    case Process::SaDiscrete: return "sa-discrete";
    case Process::GradientFlow: return "gradient-flow";
  }
  return "unknown";
}

Process parse_process(std::string_view name) {
  for (auto p : {Process::SgldDiscrete, Process::SgldContinuous, Process::SaContinuous, Process::SaDiscrete,
                 Process::GradientFlow}) {
    if (to_string(p) == name) return p;
  }
  throw UsageError("unknown process '" + std::string(name) + "'");
}

namespace {

// A point of the finest grid: an integer tick of the base step and/or a
// resolved SA grid time T_k.
struct GridPoint {
  double t;
  long long tick;   // -1 when the point is only a T_k
  std::size_t k;    // 0 when the point is not a T_k
};

struct Level {
  double h = 0.0;
  std::vector<double> t;
  std::vector<std::size_t> base;       // index of each point in the base grid
  std::vector<unsigned char> refresh;  // sa-discrete drift refresh at the start of step i
  std::vector<std::size_t> record;     // grid indices of the record times
  std::vector<double> record_times;
};

long long snap(double t, double h) { return std::llround(t / h); }

std::vector<GridPoint> base_points(double h_base, long long end_tick, std::size_t k_resolved) {
  std::vector<GridPoint> ticks;
  ticks.reserve(static_cast<std::size_t>(end_tick) + 1);
  for (long long j = 0; j <= end_tick; ++j) ticks.push_back({static_cast<double>(j) * h_base, j, 0});
  const double t_end = static_cast<double>(end_tick) * h_base;
  std::vector<GridPoint> extra;
  for (std::size_t k = 1; k <= k_resolved; ++k) {
    const double Tk = grid_time(k);
    if (Tk >= t_end) break;
    const long long j = snap(Tk, h_base);
    if (std::abs(ticks[static_cast<std::size_t>(j)].t - Tk) <= 1e-12) {
      ticks[static_cast<std::size_t>(j)].k = k;
    } else {
      extra.push_back({Tk, -1, k});
    }
  }
  std::vector<GridPoint> pts;
  pts.reserve(ticks.size() + extra.size());
  std::merge(ticks.begin(), ticks.end(), extra.begin(), extra.end(), std::back_inserter(pts),
             [](const GridPoint& a, const GridPoint& b) { return a.t < b.t; });
  return pts;
}

std::size_t resolved_count(double h) { return static_cast<std::size_t>(std::floor(1.0 / h + 1e-9)); }

Level select_level(const std::vector<GridPoint>& pts, double h_base, long long factor, bool resolve_T,
                   std::span<const double> record_times) {
  Level lv;
  lv.h = h_base * static_cast<double>(factor);
  const std::size_t K = resolve_T ? resolved_count(lv.h) : 0;
  const double t_last_resolved = K > 0 ? grid_time(K) : 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    const bool on_tick = p.tick >= 0 && p.tick % factor == 0;
    const bool is_T = p.k >= 1 && p.k <= K;
    if (!on_tick && !is_T) continue;
    lv.t.push_back(p.t);
    lv.base.push_back(i);
    lv.refresh.push_back(p.t == 0.0 || is_T || p.t > t_last_resolved ? 1 : 0);
  }
  lv.refresh.pop_back();
  for (double rt : record_times) {
    const long long tick = snap(rt, lv.h) * factor;
    const double t = static_cast<double>(tick) * h_base;
    auto it = std::lower_bound(lv.t.begin(), lv.t.end(), t);
    if (it == lv.t.end() || *it != t) throw UsageError("record time lies beyond t_end");
    lv.record.push_back(static_cast<std::size_t>(it - lv.t.begin()));
    lv.record_times.push_back(t);
  }
  return lv;
}

std::vector<double> sorted_records(const SdeOptions& opts) {
  std::vector<double> r = opts.record_times;
  for (double t : r) {
    if (t < 0.0 || t > opts.t_end) throw UsageError("record times must lie in [0, t_end]");
  }
  r.push_back(opts.t_end);
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

// Brownian increments along the base grid, replayed identically from a seed.
class BrownianPath {
 public:
  BrownianPath(const std::vector<GridPoint>& base, std::size_t d, std::uint64_t seed)
      : base_(base), d_(d), rng_(seed) {}

  void advance(std::size_t to, double* out) {
    std::fill(out, out + d_, 0.0);
    for (; at_ < to; ++at_) {
      const double s = std::sqrt(base_[at_ + 1].t - base_[at_].t);
      for (std::size_t j = 0; j < d_; ++j) out[j] += s * rng_.next();
    }
  }

 private:
  const std::vector<GridPoint>& base_;
  std::size_t d_;
  GaussianSource rng_;
  std::size_t at_ = 0;
};

struct Lane {
  Process kind;
  std::vector<double> sd;  // empty for the gradient flow
};

std::vector<double> diffusion_scale(const Level& lv, Process kind, const Schedule& schedule, bool exact) {
  const std::size_t steps = lv.t.size() - 1;
  switch (kind) {
    case Process::GradientFlow:
      return {};
    case Process::SgldContinuous:
      if (!schedule.is_constant()) throw UsageError("sgld-continuous needs a constant schedule (fixed beta)");
      return std::vector<double>(steps, std::sqrt(2.0 / schedule.constant_value()));
    case Process::SaContinuous:
    case Process::SaDiscrete: {
      std::vector<double> sd(steps);
      for (std::size_t i = 0; i < steps; ++i) {
        sd[i] = exact ? std::sqrt(noise_variance_integral(schedule, lv.t[i], lv.t[i + 1]) / (lv.t[i + 1] - lv.t[i]))
                      : std::sqrt(2.0 / schedule.gamma(lv.t[i]));
      }
      return sd;
    }
    case Process::SgldDiscrete:
      break;
  }
  throw UsageError("sgld-discrete is simulated by run_sgld_discrete");
}

void grad_Ln(const LossModel& model, const SampleSet& S, const double* w, double* out) {
  const std::size_t d = S.d;
  std::fill(out, out + d, 0.0);
  const double weight = 1.0 / static_cast<double>(S.n);
  for (std::size_t i = 0; i < S.n; ++i) model.grad_accumulate(w, S.points.data() + i * d, weight, out);
}

double Ln(const LossModel& model, const SampleSet& S, const double* w) {
  double s = 0.0;
  for (std::size_t i = 0; i < S.n; ++i) s += model.loss_unchecked(w, S.points.data() + i * S.d);
  return s / static_cast<double>(S.n);
}

// Integrates one replica of every lane over the level's grid with one shared
// Brownian path. obs(grid_index, states) runs at index 0 and after each step;
// returning false stops the replica early.
template <class Obs>
void integrate_replica(const LossModel& model, const SampleSet& S, const Level& lv,
                       const std::vector<GridPoint>& base, std::span<const Lane> lanes,
                       std::span<const double> x0, std::uint64_t seed, Obs&& obs) {
  const std::size_t d = S.d;
  const std::size_t L = lanes.size();
  std::vector<double> x(L * d), g(L * d), dW(d);
  for (std::size_t l = 0; l < L; ++l) std::copy(x0.begin(), x0.end(), x.begin() + l * d);
  BrownianPath path(base, d, seed);
  if (!obs(std::size_t{0}, std::span<const double>(x))) return;
  const std::size_t steps = lv.t.size() - 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const double dt = lv.t[i + 1] - lv.t[i];
    path.advance(lv.base[i + 1], dW.data());
    for (std::size_t l = 0; l < L; ++l) {
      double* xl = x.data() + l * d;
      double* gl = g.data() + l * d;
      if (lanes[l].kind != Process::SaDiscrete || lv.refresh[i]) grad_Ln(model, S, xl, gl);
      const double sd = lanes[l].sd.empty() ? 0.0 : lanes[l].sd[i];
      for (std::size_t j = 0; j < d; ++j) {
        xl[j] += -dt * gl[j] + sd * dW[j];
        if (!std::isfinite(xl[j])) {
          std::ostringstream os;
          os << to_string(lanes[l].kind) << ": non-finite state at step " << i << " (t=" << lv.t[i + 1] << ")";
          throw NumericError(os.str());
        }
      }
    }
    if (!obs(i + 1, std::span<const double>(x))) return;
  }
}

void check_inputs(const LossModel& model, const SampleSet& S, std::span<const double> x0) {
  validate_sample(model, S);
  if (x0.size() != model.dimension()) throw UsageError("x0 has the wrong dimension");
  for (double v : x0) {
    if (!std::isfinite(v)) throw UsageError("x0 must be finite");
  }
}

void check_step(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) throw UsageError("internal step h must be positive");
}

TrajectoryEnsemble make_ensemble(Process p, std::size_t R, std::size_t d, std::vector<double> times,
                                 const LossModel& model, std::string schedule, const NoiseStream& noise) {
  TrajectoryEnsemble e;
  e.process = p;
  e.replicas = R;
  e.d = d;
  e.times = std::move(times);
  e.states.assign(R * e.times.size() * d, 0.0);
  e.model = model.describe();
  e.schedule = std::move(schedule);
  e.noise = noise;
  return e;
}

// Records every lane at the level's record indices.
struct Recorder {
  const Level& lv;
  std::vector<TrajectoryEnsemble*> out;
  std::size_t r;
  std::size_t d;
  std::size_t next = 0;

  bool operator()(std::size_t idx, std::span<const double> x) {
    while (next < lv.record.size() && lv.record[next] == idx) {
      for (std::size_t l = 0; l < out.size(); ++l) {
        auto* e = out[l];
        std::copy_n(x.data() + l * d, d, e->states.data() + (r * e->times.size() + next) * d);
      }
      ++next;
    }
    return true;
  }
};

struct LevelPlan {
  std::vector<GridPoint> base;
  std::vector<Level> levels;
};

LevelPlan plan_levels(std::span<const double> steps, double t_end, bool resolve_T,
                      std::span<const double> records) {
  LevelPlan plan;
  const double h_min = *std::min_element(steps.begin(), steps.end());
  const long long end_tick = snap(t_end, h_min);
  plan.base = base_points(h_min, end_tick, resolve_T ? resolved_count(h_min) : 0);
  for (double h : steps) {
    const long long factor = std::llround(h / h_min);
    if (snap(t_end, h) * factor != end_tick) {
      throw UsageError("t_end must be a multiple of every internal step for shared-noise levels");
    }
    plan.levels.push_back(select_level(plan.base, h_min, factor, resolve_T, records));
  }
  return plan;
}

CoupledRun coupled_on_level(const LossModel& model, const SampleSet& S, Process a, Process b,
                            std::span<const double> x0, const Schedule& schedule, const SdeOptions& opts,
                            const Level& lv, const std::vector<GridPoint>& base, const CouplingConstants* rho) {
  const std::size_t d = S.d;
  const std::size_t R = opts.replicas;
  const std::array<Lane, 2> lanes{Lane{a, diffusion_scale(lv, a, schedule, opts.exact_noise_variance)},
                                  Lane{b, diffusion_scale(lv, b, schedule, opts.exact_noise_variance)}};
  NoiseStream noise = opts.noise;
  noise.step = lv.h;
  CoupledRun run;
  run.step = lv.h;
  run.first = make_ensemble(a, R, d, lv.record_times, model, schedule.describe(), noise);
  run.second = make_ensemble(b, R, d, lv.record_times, model, schedule.describe(), noise);
  for_each_index(R, opts.policy, [&](std::size_t r) {
    Recorder rec{lv, {&run.first, &run.second}, r, d};
    integrate_replica(model, S, lv, base, lanes, x0, opts.noise.replica_seed(r), rec);
  });
  const std::size_t T = lv.record_times.size();
  run.distance.assign(R * T, 0.0);
  if (rho) run.rho2.assign(R * T, 0.0);
  for_each_index(R, opts.policy, [&](std::size_t r) {
    for (std::size_t ti = 0; ti < T; ++ti) {
      auto x = run.first.state(r, ti);
      auto y = run.second.state(r, ti);
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
      run.distance[r * T + ti] = std::sqrt(s);
      if (rho) run.rho2[r * T + ti] = rho->rho2(x, y);
    }
  });
  std::vector<double> column(R);
  for (std::size_t ti = 0; ti < T; ++ti) {
    for (std::size_t r = 0; r < R; ++r) column[r] = run.distance[r * T + ti];
    run.mean_distance.push_back(mean_ci(column));
    if (rho) {
      for (std::size_t r = 0; r < R; ++r) column[r] = run.rho2[r * T + ti];
      run.mean_rho2.push_back(mean_ci(column));
    }
  }
  return run;
}

}  // namespace

TrajectoryEnsemble run_sgld_discrete(const LossModel& model, const SampleSet& S, std::span<const double> x0,
                                     const SgldDiscreteOptions& opts) {
  check_inputs(model, S, x0);
  if (!(opts.step > 0.0)) throw UsageError("step size must be positive");
  if (!(opts.beta > 0.0)) throw UsageError("beta must be positive");
  if (opts.replicas == 0) throw UsageError("replica count must be >= 1");
  std::vector<std::size_t> rec = opts.record_steps;
  if (rec.empty()) {
    rec.resize(opts.k_max + 1);
    for (std::size_t k = 0; k <= opts.k_max; ++k) rec[k] = k;
  }
  std::sort(rec.begin(), rec.end());
  rec.erase(std::unique(rec.begin(), rec.end()), rec.end());
  if (rec.back() > opts.k_max) throw UsageError("record step beyond k_max");
  std::vector<double> times(rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) times[i] = static_cast<double>(rec[i]) * opts.step;

  const std::size_t d = S.d;
  const double noise_sd = std::isinf(opts.beta) ? 0.0 : std::sqrt(2.0 * opts.step / opts.beta);
  NoiseStream noise = opts.noise;
  noise.step = opts.step;
  std::ostringstream sched;
  sched << "fixed(beta=" << opts.beta << ")";
  TrajectoryEnsemble e = make_ensemble(Process::SgldDiscrete, opts.replicas, d, times, model, sched.str(), noise);
  for_each_index(opts.replicas, opts.policy, [&](std::size_t r) {
    std::vector<double> x(x0.begin(), x0.end()), g(d);
    GaussianSource rng(noise.replica_seed(r));
    std::size_t next = 0;
    for (std::size_t k = 0;; ++k) {
      if (next < rec.size() && rec[next] == k) {
        std::copy(x.begin(), x.end(), e.states.begin() + static_cast<std::ptrdiff_t>((r * times.size() + next) * d));
        ++next;
      }
      if (k == opts.k_max) break;
      grad_Ln(model, S, x.data(), g.data());
      for (std::size_t j = 0; j < d; ++j) {
        const double eps = noise_sd > 0.0 ? rng.next() : 0.0;
        x[j] += -opts.step * g[j] + noise_sd * eps;
        if (!std::isfinite(x[j])) {
          throw NumericError("sgld-discrete: non-finite state at step " + std::to_string(k));
        }
      }
    }
  });
  return e;
}

TrajectoryEnsemble run_sde(const LossModel& model, const SampleSet& S, Process process,
                           std::span<const double> x0, const Schedule& schedule, const SdeOptions& opts) {
  check_inputs(model, S, x0);
  check_step(opts.noise.step);
  if (opts.replicas == 0) throw UsageError("replica count must be >= 1");
  if (opts.t_end < 0.0) throw UsageError("t_end must be >= 0");
  const auto records = sorted_records(opts);
  const double h = opts.noise.step;
  const bool resolve_T = process == Process::SaDiscrete;
  const auto base = base_points(h, snap(opts.t_end, h), resolve_T ? resolved_count(h) : 0);
  const Level lv = select_level(base, h, 1, resolve_T, records);
  const std::array<Lane, 1> lanes{Lane{process, diffusion_scale(lv, process, schedule, opts.exact_noise_variance)}};
  TrajectoryEnsemble e = make_ensemble(process, opts.replicas, S.d, lv.record_times, model, schedule.describe(),
                                       opts.noise);
  for_each_index(opts.replicas, opts.policy, [&](std::size_t r) {
    Recorder rec{lv, {&e}, r, S.d};
    integrate_replica(model, S, lv, base, lanes, x0, opts.noise.replica_seed(r), rec);
  });
  return e;
}

TrajectoryEnsemble run_sa_discrete_grid(const LossModel& model, const SampleSet& S, std::span<const double> x0,
                                        const Schedule& schedule, std::size_t k_max, std::size_t replicas,
                                        const NoiseStream& noise, ExecutionPolicy policy) {
  check_inputs(model, S, x0);
  if (replicas == 0) throw UsageError("replica count must be >= 1");
  const std::size_t d = S.d;
  std::vector<double> times(k_max + 1), sd(k_max), step(k_max);
  for (std::size_t k = 0; k <= k_max; ++k) times[k] = grid_time(k);
  for (std::size_t k = 0; k < k_max; ++k) {
    step[k] = step_size(k + 1);
    sd[k] = std::sqrt(noise_variance_integral(schedule, times[k], times[k + 1]));
  }
  TrajectoryEnsemble e = make_ensemble(Process::SaDiscrete, replicas, d, times, model, schedule.describe(), noise);
  for_each_index(replicas, policy, [&](std::size_t r) {
    std::vector<double> x(x0.begin(), x0.end()), g(d);
    GaussianSource rng(noise.replica_seed(r));
    for (std::size_t k = 0;; ++k) {
      std::copy(x.begin(), x.end(), e.states.begin() + static_cast<std::ptrdiff_t>((r * times.size() + k) * d));
      if (k == k_max) break;
      grad_Ln(model, S, x.data(), g.data());
      for (std::size_t j = 0; j < d; ++j) {
        x[j] += -step[k] * g[j] + sd[k] * rng.next();
        if (!std::isfinite(x[j])) throw NumericError("sa-discrete grid: non-finite state at k=" + std::to_string(k));
      }
    }
  });
  return e;
}

bool levels_share_noise(std::span<const double> steps) {
  if (steps.empty()) return false;
  const double h_min = *std::min_element(steps.begin(), steps.end());
  for (double h : steps) {
    const double ratio = h / h_min;
    const long long f = std::llround(ratio);
    if (f < 1 || std::abs(ratio - static_cast<double>(f)) > 1e-9 || (f & (f - 1)) != 0) return false;
  }
  return true;
}

CoupledRun run_coupled(const LossModel& model, const SampleSet& S, Process a, Process b,
                       std::span<const double> x0, const Schedule& schedule, const SdeOptions& opts,
                       const CouplingConstants* rho) {
  const double h = opts.noise.step;
  return std::move(run_coupled_levels(model, S, a, b, x0, schedule, opts, std::span<const double>(&h, 1), rho).front());
}

std::vector<CoupledRun> run_coupled_levels(const LossModel& model, const SampleSet& S, Process a, Process b,
                                           std::span<const double> x0, const Schedule& schedule,
                                           const SdeOptions& opts, std::span<const double> steps,
                                           const CouplingConstants* rho) {
  check_inputs(model, S, x0);
  if (steps.empty()) throw UsageError("at least one internal step is required");
  for (double h : steps) check_step(h);
  if (opts.replicas == 0) throw UsageError("replica count must be >= 1");
  if (a == Process::SgldDiscrete || b == Process::SgldDiscrete) {
    throw UsageError("coupled runs cover the continuous-time processes");
  }
  const auto records = sorted_records(opts);
  const bool resolve_T = a == Process::SaDiscrete || b == Process::SaDiscrete;
  std::vector<CoupledRun> out;
  if (levels_share_noise(steps)) {
    const LevelPlan plan = plan_levels(steps, opts.t_end, resolve_T, records);
    for (const Level& lv : plan.levels) {
      out.push_back(coupled_on_level(model, S, a, b, x0, schedule, opts, lv, plan.base, rho));
    }
  } else {
    for (double h : steps) {
      const auto base = base_points(h, snap(opts.t_end, h), resolve_T ? resolved_count(h) : 0);
      const Level lv = select_level(base, h, 1, resolve_T, records);
      out.push_back(coupled_on_level(model, S, a, b, x0, schedule, opts, lv, base, rho));
    }
  }
  return out;
}

double flow_divergence_bound(double M, std::size_t d, double gamma_s, double delta, double t) {
  if (!(delta > 0.0) || !(t > 0.0) || !(gamma_s > 0.0)) throw UsageError("divergence bound needs delta, t, gamma > 0");
  const double dd = static_cast<double>(d);
  return 4.0 * std::exp(M * t) * dd * dd / delta * std::sqrt(t / (std::numbers::pi * gamma_s)) *
         std::exp(-std::exp(-2.0 * M * t) * delta * delta * gamma_s / (4.0 * t * dd * dd));
}

ProbabilityEstimate flow_divergence_probability(const LossModel& model, const SampleSet& S,
                                                std::span<const double> x0, double gamma_s, double delta,
                                                double t, std::size_t replicas, const NoiseStream& noise,
                                                ExecutionPolicy policy) {
  check_inputs(model, S, x0);
  check_step(noise.step);
  if (replicas == 0) throw UsageError("replica count must be >= 1");
  const double h = noise.step;
  const auto base = base_points(h, snap(t, h), 0);
  const Level lv = select_level(base, h, 1, false, {});
  const Schedule beta = Schedule::constant(gamma_s);
  const std::array<Lane, 2> lanes{Lane{Process::GradientFlow, {}},
                                  Lane{Process::SgldContinuous, diffusion_scale(lv, Process::SgldContinuous, beta, false)}};
  const std::size_t d = S.d;
  std::vector<unsigned char> hit(replicas, 0);
  for_each_index(replicas, policy, [&](std::size_t r) {
    integrate_replica(model, S, lv, base, lanes, x0, noise.replica_seed(r),
                      [&](std::size_t, std::span<const double> x) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < d; ++j) s += (x[j] - x[d + j]) * (x[j] - x[d + j]);
                        if (std::sqrt(s) >= delta) {
                          hit[r] = 1;
                          return false;
                        }
                        return true;
                      });
  });
  ProbabilityEstimate est;
  est.replicas = replicas;
  est.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  est.probability = wilson_interval(est.hits, replicas);
  est.bound = flow_divergence_bound(model.constants().M, d, gamma_s, delta, t);
  est.note = "supremum over the step grid (h=" + std::to_string(h) + "); underestimates the continuous supremum";
  return est;
}

ProbabilityEstimate exit_probability(const LossModel& model, const SampleSet& S, std::span<const double> x0,
                                     double level, double T, std::size_t replicas, const Schedule& schedule,
                                     const NoiseStream& noise, ExecutionPolicy policy) {
  check_inputs(model, S, x0);
  check_step(noise.step);
  if (replicas == 0) throw UsageError("replica count must be >= 1");
  if (!(level > empirical_loss(model, x0, S))) throw UsageError("exit level must exceed L_n(x0)");
  ProbabilityEstimate est;
  est.replicas = replicas;
  if (T <= 0.0) {
    est.probability = wilson_interval(0, replicas);
    return est;
  }
  const double h = noise.step;
  const auto base = base_points(h, snap(T, h), 0);
  const Level lv = select_level(base, h, 1, false, {});
  const std::array<Lane, 1> lanes{Lane{Process::SaContinuous, diffusion_scale(lv, Process::SaContinuous, schedule, false)}};
  std::vector<unsigned char> hit(replicas, 0);
  for_each_index(replicas, policy, [&](std::size_t r) {
    integrate_replica(model, S, lv, base, lanes, x0, noise.replica_seed(r),
                      [&](std::size_t, std::span<const double> x) {
                        if (Ln(model, S, x.data()) > level) {
                          hit[r] = 1;
                          return false;
                        }
                        return true;
                      });
  });
  est.hits = static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
  est.probability = wilson_interval(est.hits, replicas);
  est.note = "supremum over the step grid (h=" + std::to_string(h) + ")";
  return est;
}

MomentSeries moment_estimate(const TrajectoryEnsemble& ensemble, double p, std::size_t resamples,
                             std::uint64_t seed) {
  if (!(p > 0.0)) throw UsageError("moment order must be positive");
  MomentSeries out;
  out.times = ensemble.times;
  std::vector<double> v(ensemble.replicas);
  for (std::size_t ti = 0; ti < ensemble.times.size(); ++ti) {
    for (std::size_t r = 0; r < ensemble.replicas; ++r) {
      auto x = ensemble.state(r, ti);
      double s = 0.0;
      for (double c : x) s += c * c;
      v[r] = p == 2.0 ? s : std::pow(s, 0.5 * p);
    }
    out.moments.push_back(bootstrap_mean_ci(v, resamples, derive_seed(seed, ti)));
  }
  return out;
}

std::string trajectory_csv(const TrajectoryEnsemble& ensemble) {
  std::string out = "replica,time";
  for (std::size_t j = 0; j < ensemble.d; ++j) out += ",x" + std::to_string(j);
  out += '\n';
  char buf[40];
  for (std::size_t r = 0; r < ensemble.replicas; ++r) {
    for (std::size_t ti = 0; ti < ensemble.times.size(); ++ti) {
      out += std::to_string(r);
      std::snprintf(buf, sizeof buf, ",%.17g", ensemble.times[ti]);
      out += buf;
      for (double v : ensemble.state(r, ti)) {
        std::snprintf(buf, sizeof buf, ",%.17g", v);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

nlohmann::json trajectory_summary(const TrajectoryEnsemble& ensemble) {
  nlohmann::json j;
  j["process"] = std::string(to_string(ensemble.process));
  j["model"] = ensemble.model;
  j["schedule"] = ensemble.schedule;
  j["replicas"] = ensemble.replicas;
  j["d"] = ensemble.d;
  j["noise"] = {{"seed", ensemble.noise.seed}, {"step", ensemble.noise.step}, {"generator", ensemble.noise.generator}};
  auto times = nlohmann::json::array();
  for (std::size_t ti = 0; ti < ensemble.times.size(); ++ti) {
    std::vector<double> m2(ensemble.replicas);
    std::vector<std::vector<double>> coord(ensemble.d, std::vector<double>(ensemble.replicas));
    for (std::size_t r = 0; r < ensemble.replicas; ++r) {
      const auto x = ensemble.state(r, ti);
      double s = 0.0;
      for (std::size_t k = 0; k < ensemble.d; ++k) {
        coord[k][r] = x[k];
        s += x[k] * x[k];
      }
      m2[r] = s;
    }
    nlohmann::json mean_j = nlohmann::json::array();
    for (const auto& c : coord) {
      const Estimate e = mean_ci(c);
      mean_j.push_back({e.value, e.lo, e.hi});
    }
    const Estimate e2 = mean_ci(m2);
    times.push_back({{"t", ensemble.times[ti]}, {"mean", mean_j}, {"second_moment", {e2.value, e2.lo, e2.hi}}});
  }
  j["times"] = std::move(times);
  return j;
}

}  // namespace sgld
