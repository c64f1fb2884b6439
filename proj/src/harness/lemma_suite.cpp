#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "internal.hpp"
#include "sgld/bounds.hpp"
#include "sgld/dynamics.hpp"
#include "sgld/errors.hpp"
#include "sgld/harness/experiments.hpp"
#include "sgld/rademacher.hpp"
#include "sgld/reference.hpp"

namespace sgld::harness {

namespace {

using detail::fmt;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Suite {
  ExperimentResult& result;
  const ExperimentConfig& cfg;

  // Runs one check; exceptions turn into failing verdicts.
  template <class Fn>
  void check(const std::string& name, Fn&& fn) {
    Verdict v;
    v.name = name;
    try {
      fn(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.margin = -kInf;
      v.detail = std::string("error: ") + e.what();
    }
    result.verdicts.push_back(v);
    result.rows.push_back(detail::exact_row(name, "margin", 0.0, v.margin, cfg.seed, "harness::lemma_suite"));
  }
};

struct NamedModel {
  std::string name;
  LossModel model;
};

std::vector<NamedModel> builtin_models() {
  return {{"quadratic-data-d1", LossModel::quadratic_data(1)},
          {"quadratic-data-d2", LossModel::quadratic_data(2)},
          {"ripple-d1", LossModel::ripple(1)},
          {"smoothed-double-well", LossModel::smoothed_double_well()}};
}

LossModel corrupt(const LossModel& m) {
  auto c = m.constants();
  c.m *= 2;
  return m.with_constants(c);
}

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

std::vector<double> random_in_ball(GaussianSource& rng, std::size_t d, double radius) {
  std::vector<double> x(d);
  rng.fill(x);
  const double n = std::sqrt(norm2(x));
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  for (double& v : x) v *= n > 0.0 ? r / n : 0.0;
  return x;
}

void gradient_consistency(Verdict& v, const LossModel& model, const SampleSet& S, std::uint64_t seed) {
  GaussianSource rng(seed);
  const std::size_t d = model.dimension();
  std::vector<double> g(d), wp(d);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto w = random_in_ball(rng, d, 4.0);
    const auto z = S.point(static_cast<std::size_t>(rng.uniform() * static_cast<double>(S.n)) % S.n);
    model.grad(w, z, g);
    for (std::size_t j = 0; j < d; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(w[j]));
      wp = w;
      wp[j] = w[j] + h;
      const double fp = model.loss(wp, z);
      wp[j] = w[j] - h;
      const double fm = model.loss(wp, z);
      const double fd = (fp - fm) / (2 * h);
      worst = std::max(worst, std::abs(fd - g[j]) / std::max(1.0, std::abs(g[j])));
    }
  }
  v.margin = 1e-5 - worst;
  v.pass = v.margin >= 0.0;
  v.detail = "max relative error vs central differences " + fmt(worst) + " (tolerance 1e-5)";
}

void level_set_radius(Verdict& v, const LossModel& model, const SampleSet& S, double inf_F, std::uint64_t seed) {
  const auto& c = model.constants();
  GaussianSource rng(seed);
  const double box = 2 * std::sqrt(c.b / c.m) + 3;
  double worst = kInf;
  for (int i = 0; i < 10000; ++i) {
    const auto x = random_in_ball(rng, model.dimension(), box);
    const double r = empirical_loss(model, x, S);
    const double rhs = 4 / c.m * (r + 0.5 * c.b * std::log(2.0) - inf_F);
    worst = std::min(worst, (rhs - norm2(x)) / std::max(1.0, rhs));
  }
  v.margin = worst;
  v.pass = worst >= -1e-9;
  v.detail = "min relative slack of |x|^2 <= (4/m)(L_n(x) + b log(2)/2 - inf L_n) over 1e4 probes: " + fmt(worst);
}

void moment_bound_check(Verdict& v, const LossModel& model, const SampleSet& S, std::uint64_t seed,
                        ExecutionPolicy policy) {
  const std::size_t d = model.dimension();
  const std::vector<double> x0(d, 2.0);
  SdeOptions o;
  o.t_end = 5.0;
  for (int j = 1; j < 10; ++j) o.record_times.push_back(0.5 * j);
  o.replicas = 400;
  o.noise.seed = seed;
  o.noise.step = 1e-2;
  o.policy = policy;
  const auto ens = run_sde(model, S, Process::SgldContinuous, x0, Schedule::constant(1.0), o);
  const auto& c = model.constants();
  const auto lc = lyapunov_constants(c.m, c.b, d, 1.0, 2.0);
  double worst = kInf;
  for (std::size_t ti = 0; ti < ens.times.size(); ++ti) {
    std::vector<double> m2(ens.replicas);
    for (std::size_t r = 0; r < ens.replicas; ++r) m2[r] = norm2(ens.state(r, ti));
    const Estimate e = mean_ci(m2);
    const double bound = moment_bound(lc, norm2(x0), ens.times[ti]);
    worst = std::min(worst, bound - (e.value - 2 * e.half_width()));
  }
  v.margin = worst;
  v.pass = worst >= 0.0;
  v.detail = "min over 10 times of bound - (MC E|Z|^2 - 2 half-widths), beta = 1, x0 = 2: " + fmt(worst);
}

// Points on {L_n = level} found along random rays, and points inside {L_n <= r0}.
void separation_check(Verdict& v, const LossModel& model, const SampleSet& S, double inf_F, double delta,
                      std::uint64_t seed) {
  const auto& c = model.constants();
  const std::size_t d = model.dimension();
  const auto lt = level_thresholds(model, S, delta);
  const double r0 = lt.r0_tilde;
  const double r1 = r1_tilde(c.m, c.M, c.b, lt.F0, lt.grad_F0_sq, inf_F, r0, delta);
  auto radius = [&](double level) { return std::sqrt(std::max(0.0, 4 / c.m * (level + 0.5 * c.b * std::log(2.0) - inf_F))); };
  GaussianSource rng(seed);
  constexpr std::size_t kPoints = 10000;

  std::vector<std::vector<double>> inner;
  const double rho0 = radius(r0) * 1.001 + 1e-9;
  for (std::size_t tries = 0; inner.size() < kPoints && tries < 1000 * kPoints; ++tries) {
    auto x = random_in_ball(rng, d, rho0);
    if (empirical_loss(model, x, S) <= r0) inner.push_back(std::move(x));
  }
  if (inner.size() < kPoints) throw NumericError("separation: could not sample the r0 level set");

  std::vector<std::vector<double>> shell;
  const double rho1 = radius(r1 + 1e-3) * 1.01 + 1e-9;
  constexpr int kScan = 2000;
  for (std::size_t tries = 0; shell.size() < kPoints && tries < 10 * kPoints; ++tries) {
    std::vector<double> u(d);
    rng.fill(u);
    const double un = std::sqrt(norm2(u));
    for (double& e : u) e /= un;
    const double level = r1 + (2 * rng.uniform() - 1) * 1e-3;
    auto at = [&](double rho) {
      std::vector<double> x(u);
      for (double& e : x) e *= rho;
      return x;
    };
    auto G = [&](double rho) { return empirical_loss(model, at(rho), S) - level; };
    std::vector<double> crossings;
    double prev = G(0.0);
    for (int i = 1; i <= kScan; ++i) {
      const double rho = rho1 * i / kScan;
      const double cur = G(rho);
      if ((prev <= 0.0) != (cur <= 0.0)) crossings.push_back(rho);
      prev = cur;
    }
    if (crossings.empty()) continue;
    double hi = crossings[static_cast<std::size_t>(rng.uniform() * static_cast<double>(crossings.size())) %
                         crossings.size()];
    double lo = hi - rho1 / kScan;
    const bool rising = G(lo) <= 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * rho1; ++it) {
      const double mid = 0.5 * (lo + hi);
      ((G(mid) <= 0.0) == rising ? lo : hi) = mid;
    }
    auto y = at(0.5 * (lo + hi));
    if (std::abs(empirical_loss(model, y, S) - r1) <= 1e-3) shell.push_back(std::move(y));
  }
  if (shell.size() < kPoints) throw NumericError("separation: could not sample the r1 level set");

  double best = kInf;
  if (d == 1) {
    std::vector<double> a, b;
    for (const auto& x : inner) a.push_back(x[0]);
    for (const auto& y : shell) b.push_back(y[0]);
    std::sort(a.begin(), a.end());
    for (double y : b) {
      auto it = std::lower_bound(a.begin(), a.end(), y);
      if (it != a.end()) best = std::min(best, std::abs(*it - y));
      if (it != a.begin()) best = std::min(best, std::abs(*std::prev(it) - y));
    }
  } else {
    for (const auto& x : inner)
      for (const auto& y : shell) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
        best = std::min(best, s);
      }
    best = std::sqrt(best);
  }
  v.margin = best - delta;
  v.pass = v.margin >= 0.0;
  v.detail = "min distance between {L_n <= r0~} and {|L_n - r1~| <= 1e-3} samples " + fmt(best) + " vs delta " +
             fmt(delta) + " (r0~ = " + fmt(r0) + ", r1~ = " + fmt(r1) + ")";
}

void covering_chain(Verdict& v, const LossModel& model, const SampleSet& S, double R, std::size_t K,
                    std::uint64_t seed, ExecutionPolicy policy) {
  RademacherOptions o;
  o.R = R;
  o.K = K;
  o.seed = seed;
  o.policy = policy;
  const auto est = empirical_rademacher(model, S, o);
  const auto& c = model.constants();
  const double thm = covering_theorem_value(c.A, c.B, c.M, model.dimension(), R, static_cast<double>(S.n));
  const double closed = covering_gen_bound(model, R, static_cast<double>(S.n)).rademacher;
  const double lower = est.estimate - 2 * est.ci.half_width();
  v.margin = std::min(thm - lower, closed - thm);
  v.pass = v.margin >= 0.0;
  v.detail = "estimate - 2 hw = " + fmt(lower) + " <= theorem value " + fmt(thm) + " <= closed form " + fmt(closed);
}

}  // namespace

ExperimentResult lemma_suite(const ExperimentConfig& cfg, const std::filesystem::path&) {
  detail::Stopwatch clock;
  ExperimentResult res = detail::start_result(cfg);
  Suite suite{res, cfg};
  const std::uint64_t seed = cfg.seed;
  const auto pol = cfg.policy;

  std::size_t mi = 0;
  for (auto& [name, clean] : builtin_models()) {
    const LossModel model = cfg.negative_control ? corrupt(clean) : clean;
    const std::uint64_t ms = derive_seed(seed, 100 + mi++);
    const SampleSet S = draw_sample_set(model, cfg.n, derive_seed(ms, 0));
    const double inf_F = empirical_loss_infimum(model, S, 0, pol).value;

    suite.check("gradient-consistency/" + name, [&](Verdict& v) { gradient_consistency(v, model, S, derive_seed(ms, 1)); });
    suite.check("regularity/" + name, [&](Verdict& v) {
      const auto r = verify_regularity(model, 1000, derive_seed(ms, 2));
      v.pass = r.pass;
      v.margin = std::min(r.m_emp - model.constants().m, model.constants().b - r.b_emp);
      v.detail = std::to_string(r.violations) + " violations over " + std::to_string(r.probes) + " probes" +
                 (r.first_violation.empty() ? "" : "; first: " + r.first_violation);
    });
    suite.check("dissipative-sandwich/" + name, [&](Verdict& v) {
      const auto r = check_dissipative_sandwich(model, S, 10000, derive_seed(ms, 3));
      v.pass = r.pass;
      v.margin = std::min(r.min_lower_margin, r.min_upper_margin);
      v.detail = "min relative margins lower " + fmt(r.min_lower_margin) + ", upper " + fmt(r.min_upper_margin) +
                 " (tolerance -1e-9)";
    });
    suite.check("level-set-radius/" + name, [&](Verdict& v) { level_set_radius(v, model, S, inf_F, derive_seed(ms, 4)); });
    suite.check("grid-min/" + name, [&](Verdict& v) {
      GaussianSource rng(derive_seed(ms, 5));
      double worst = kInf;
      for (int i = 0; i < 1000; ++i) {
        const auto x = random_in_ball(rng, model.dimension(), 3.0);
        worst = std::min(worst, empirical_loss(model, x, S) - inf_F);
      }
      v.margin = worst;
      v.pass = worst >= 0.0;
      v.detail = "min over 1000 probes of L_n(x) - grid_min = " + fmt(worst);
    });
    suite.check("moment-bound/" + name,
                [&](Verdict& v) { moment_bound_check(v, model, S, derive_seed(ms, 6), pol); });
    suite.check("level-separation/" + name,
                [&](Verdict& v) { separation_check(v, model, S, inf_F, cfg.delta, derive_seed(ms, 7)); });
    suite.check("covering-chain/" + name, [&](Verdict& v) {
      covering_chain(v, model, S, model.dimension() == 1 ? 2.0 : 1.0, model.dimension() == 1 ? cfg.K : 50,
                     derive_seed(ms, 8), pol);
    });
  }

  const LossModel quad = LossModel::quadratic_data(1);
  const SampleSet Sq = draw_sample_set(quad, cfg.n, derive_seed(seed, 1));

  suite.check("flow-divergence/quadratic-data-d1", [&](Verdict& v) {
    NoiseStream noise{derive_seed(seed, 2), 1e-3};
    const std::vector<double> x0{0.0};
    const auto p = flow_divergence_probability(quad, Sq, x0, 50.0, 1.0, 1.0, 2000, noise, pol);
    const double bound = flow_divergence_bound(quad.constants().M, 1, 50.0, 1.0, 1.0);
    v.margin = bound - p.probability.lo;
    v.pass = v.margin >= 0.0;
    v.detail = "P = " + fmt(p.probability.value) + " [" + fmt(p.probability.lo) + ", " + fmt(p.probability.hi) +
               "] vs bound " + fmt(bound);
  });

  suite.check("time-change/constant-identity", [&](Verdict& v) {
    GaussianSource rng(derive_seed(seed, 3));
    const Schedule s = Schedule::constant(2.5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double a = 1e3 * rng.uniform(), t = 1e2 * rng.uniform();
      worst = std::max(worst, std::abs(time_change(s, a, t) - (a + t)));
    }
    v.margin = 1e-8 - worst;
    v.pass = v.margin >= 0.0;
    v.detail = "max |alpha(s,t) - (s+t)| = " + fmt(worst);
  });
  suite.check("time-change/sandwich", [&](Verdict& v) {
    const Schedule s = Schedule::iterated_log();
    const double a = 1e6, t = std::pow(a, 2.0 / 3.0);
    const double alpha = time_change(s, a, t);
    v.margin = std::min(alpha - (a + t), a + 2 * t - alpha);
    v.pass = v.margin >= 0.0;
    v.detail = "s + t <= alpha(s,t) <= s + 2t at s = 1e6, t = s^(2/3): alpha = " + fmt(alpha);
  });
  suite.check("time-change/round-trip", [&](Verdict& v) {
    GaussianSource rng(derive_seed(seed, 4));
    const Schedule s = Schedule::iterated_log();
    double worst = 0.0;
    bool increasing = true;
    for (int i = 0; i < 200; ++i) {
      const double a = 1e4 * rng.uniform(), t = 1e2 * rng.uniform();
      const double alpha = time_change(s, a, t);
      worst = std::max(worst, std::abs(time_change_integral(s, a, alpha) - t));
      increasing = increasing && time_change(s, a, t * 1.01 + 1e-6) > alpha && time_change(s, a, 0.0) == a;
    }
    v.margin = 1e-7 - worst;
    v.pass = v.margin >= 0.0 && increasing;
    v.detail = "max round-trip residual " + fmt(worst) + (increasing ? "" : "; alpha not increasing or alpha(s,0) != s");
  });
  suite.check("schedule/frozen-time-jumps", [&](Verdict& v) {
    std::size_t bad = 0;
    for (std::size_t k = 1; k <= 200; ++k) {
      const double Tk = grid_time(k);
      if (frozen_time(Tk + 1e-12) != Tk || frozen_time(Tk - 1e-12) != grid_time(k - 1)) ++bad;
    }
    v.margin = -static_cast<double>(bad);
    v.pass = bad == 0;
    v.detail = std::to_string(bad) + " of 200 jumps misplaced at T_k +- 1e-12";
  });

  const CouplingInputs base{2.0, 1.0, 1.0, 1, 1.0, 1.0};
  suite.check("coupling/monotone-in-gamma", [&](Verdict& v) {
    double prev_k = kInf, prev_c = kInf, worst = kInf;
    for (double g : {1.0, 1.5, 2.0, 3.0, 5.0, 10.0}) {
      CouplingInputs in = base;
      in.gamma_t = g;
      const CouplingConstants k(in);
      worst = std::min({worst, prev_k - k.kappa(), prev_c - k.c(), k.lambda() / 2 - k.c(), k.xi() - k.zeta(),
                        0.5 - k.kappa()});
      prev_k = k.kappa();
      prev_c = k.c();
    }
    v.margin = worst;
    v.pass = worst >= 0.0;
    v.detail = "kappa_t, c_t non-increasing over gamma in {1,...,10}; c_t <= lambda/2; xi_t >= zeta_t";
  });
  suite.check("coupling/function-shapes", [&](Verdict& v) {
    const CouplingConstants k(base);
    const double R2 = k.R2();
    constexpr int kN = 60;
    std::vector<double> f(kN + 1);
    double worst = std::min(-std::abs(k.phi(0.0) - 1), -std::abs(k.g(0.0) - 1));
    double prev_g = kInf;
    for (int i = 0; i <= kN; ++i) {
      const double r = R2 * i / kN;
      worst = std::min(worst, r - k.Phi(r));
      const double g = k.g(r);
      worst = std::min(worst, prev_g - g + 1e-14);
      prev_g = g;
      f[i] = k.f(r);
      if (i > 0) worst = std::min(worst, f[i] - f[i - 1]);
      if (i > 1) worst = std::min(worst, -(f[i] - 2 * f[i - 1] + f[i - 2]) + 1e-12);
    }
    v.margin = worst;
    v.pass = worst >= 0.0;
    v.detail = "phi(0) = 1, Phi(r) <= r, g(0) = 1, g non-increasing, f non-decreasing and concave on [0, R2]";
  });
  suite.check("coupling/rho2-linear-lower-bound", [&](Verdict& v) {
    const CouplingConstants k(base);
    const double slope = k.phi(k.R2()) * k.g(k.R2());
    GaussianSource rng(derive_seed(seed, 5));
    double worst = kInf;
    for (int i = 0; i < 200; ++i) {
      const double x = 4 * (2 * rng.uniform() - 1);
      const double y = x + k.R2() * (2 * rng.uniform() - 1);
      const double xs[1] = {x}, ys[1] = {y};
      worst = std::min(worst, k.rho2(xs, ys) - slope * std::abs(x - y));
    }
    v.margin = worst;
    v.pass = worst >= 0.0;
    v.detail = "min rho2(x,y) - phi(R2) g(R2) |x-y| over 200 pairs = " + fmt(worst);
  });

  suite.check("rademacher/monotone-in-R", [&](Verdict& v) {
    std::vector<std::vector<double>> sups;
    for (double R : {0.5, 1.0, 2.0}) {
      RademacherOptions o;
      o.R = R;
      o.K = 100;
      o.seed = derive_seed(seed, 6);
      o.grid_per_radius = static_cast<std::size_t>(std::lround(500 * R));  // common spacing, nested grids
      o.policy = pol;
      sups.push_back(empirical_rademacher(quad, Sq, o).per_draw_sup);
    }
    double worst = kInf;
    for (std::size_t k = 0; k < sups[0].size(); ++k)
      worst = std::min({worst, sups[1][k] - sups[0][k], sups[2][k] - sups[1][k]});
    v.margin = worst;
    v.pass = worst >= 0.0;
    v.detail = "per-draw sups non-decreasing over R in {0.5, 1, 2} with common signs";
  });
  suite.check("rademacher/sign-flip-symmetry", [&](Verdict& v) {
    RademacherOptions o;
    o.R = 1.0;
    o.K = 400;
    o.seed = derive_seed(seed, 7);
    o.policy = pol;
    const auto a = empirical_rademacher(quad, Sq, o);
    o.negate_signs = true;
    const auto b = empirical_rademacher(quad, Sq, o);
    std::vector<double> diff(a.K);
    for (std::size_t k = 0; k < a.K; ++k) diff[k] = (a.per_draw_sup[k] - b.per_draw_sup[k]) / static_cast<double>(a.n);
    const Estimate e = mean_ci(diff);
    v.margin = std::min(e.hi, -e.lo);
    v.pass = e.lo <= 0.0 && 0.0 <= e.hi;
    v.detail = "paired difference sigma vs -sigma: " + fmt(e.value) + " [" + fmt(e.lo) + ", " + fmt(e.hi) + "]";
  });

  suite.check("dynamics/constant-gamma-reduction", [&](Verdict& v) {
    SdeOptions o;
    o.t_end = 2.0;
    o.replicas = 16;
    o.noise = {derive_seed(seed, 8), 1e-2};
    o.policy = pol;
    const std::vector<double> x0{1.5};
    const auto run = run_coupled(quad, Sq, Process::SaContinuous, Process::SgldContinuous, x0,
                                 Schedule::constant(3.0), o);
    const double worst = *std::max_element(run.distance.begin(), run.distance.end());
    v.margin = -worst;
    v.pass = worst == 0.0;
    v.detail = "max pathwise distance sa-continuous (gamma = 3) vs sgld-continuous (beta = 3): " + fmt(worst);
  });
  suite.check("dynamics/seed-determinism", [&](Verdict& v) {
    SdeOptions o;
    o.t_end = 1.0;
    o.replicas = 32;
    o.noise = {derive_seed(seed, 9), 1e-2};
    const std::vector<double> x0{0.5};
    o.policy = ExecutionPolicy::Serial;
    const auto a = run_sde(quad, Sq, Process::SaContinuous, x0, Schedule::iterated_log(), o);
    o.policy = ExecutionPolicy::Parallel;
    const auto b = run_sde(quad, Sq, Process::SaContinuous, x0, Schedule::iterated_log(), o);
    const auto c = run_sde(quad, Sq, Process::SaContinuous, x0, Schedule::iterated_log(), o);
    v.pass = a.states == b.states && b.states == c.states;
    v.margin = v.pass ? 0.0 : -1.0;
    v.detail = "serial, parallel and repeated runs bit-identical";
  });
  suite.check("dynamics/integrator-order", [&](Verdict& v) {
    // L_n = mean of (1/2)|x - z_i|^2, so the flow is zbar + (x0 - zbar) e^{-t}.
    double zbar = 0.0;
    for (double z : Sq.points) zbar += z;
    zbar /= static_cast<double>(Sq.n);
    const std::vector<double> x0{2.0};
    auto err = [&](double h) {
      SdeOptions o;
      o.t_end = 1.0;
      o.replicas = 1;
      o.noise.step = h;
      o.policy = pol;
      const auto e = run_sde(quad, Sq, Process::GradientFlow, x0, Schedule::constant(1.0), o);
      return std::abs(e.state(0, e.times.size() - 1)[0] - (zbar + (x0[0] - zbar) * std::exp(-1.0)));
    };
    const double ratio = err(1e-2) / err(5e-3);
    v.margin = 0.2 - std::abs(ratio - 2.0);
    v.pass = v.margin >= 0.0;
    v.detail = "error ratio when h halves: " + fmt(ratio) + " (expected 2 +- 0.2)";
  });
  suite.check("reference/gibbs-gaussian", [&](Verdict& v) {
    const auto S0 = SampleSet::from_points(1, {0.0});
    const double beta = 4.0;
    const auto g = gibbs_expectation(gibbs_spec(quad, S0, beta), [&](std::span<const double> w) {
      return empirical_loss(quad, w, S0);
    });
    const double rel = std::abs(g.value - 1 / (2 * beta)) * 2 * beta;
    v.margin = 1e-6 - rel;
    v.pass = v.margin >= 0.0;
    v.detail = "pi(L_n) for S = {0}, beta = 4: " + fmt(g.value) + " vs 1/(2 beta)";
  });

  // The corrupted-constant detector must fire regardless of cfg.negative_control.
  suite.check("negative-control/m-doubled-detected", [&](Verdict& v) {
    const LossModel bad = corrupt(quad);
    const auto r = verify_regularity(bad, 1000, derive_seed(seed, 10));
    const auto s = check_dissipative_sandwich(bad, Sq, 10000, derive_seed(seed, 11));
    v.pass = !r.pass && !s.pass;
    v.margin = v.pass ? 0.0 : -1.0;
    v.detail = std::string("regularity ") + (r.pass ? "passed" : "failed") + ", sandwich " +
               (s.pass ? "passed" : "failed") + " with m doubled (both must fail)";
  });

  res.wall_clock_s = clock.seconds();
  return res;
}

}  // namespace sgld::harness
