// sgldlab: command-line front end for the experiment harness.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "sgld/errors.hpp"
#include "sgld/harness/config.hpp"
#include "sgld/harness/experiments.hpp"
#include "sgld/harness/result.hpp"

namespace fs = std::filesystem;
using namespace sgld;
using namespace sgld::harness;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> replicas, n, draws, K, d;
  std::optional<std::string> model, schedule, policy, optimizer;
  std::optional<double> beta, t, step, gamma, delta;
  std::optional<std::vector<std::size_t>> n_values;
  std::optional<std::vector<double>> s_values, t_values, h_values, r_values, x0;
  std::vector<std::string> formats{"csv", "json", "plot-data"};
  bool resume = false;
  bool negative_control = false;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config, "JSON config file (schema_version 1)");
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("-o,--out", o.out, "output directory (relative paths go under $SGLD_OUTPUT_ROOT)");
  app->add_option("--replicas", o.replicas);
  app->add_option("--n", o.n, "sample size");
  app->add_option("--draws", o.draws, "sample-set draws per n");
  app->add_option("--K", o.K, "sign-vector draws");
  app->add_option("--model", o.model, "quadratic-data | ripple | smoothed-double-well");
  app->add_option("--d", o.d, "dimension");
  app->add_option("--schedule", o.schedule, "iterated-log | constant");
  app->add_option("--gamma", o.gamma, "constant schedule value");
  app->add_option("--beta", o.beta);
  app->add_option("--t", o.t, "time horizon");
  app->add_option("--step", o.step, "internal step h");
  app->add_option("--delta", o.delta);
  app->add_option("--optimizer", o.optimizer, "grid | multi-start-ascent");
  app->add_option("--policy", o.policy, "serial | parallel");
  app->add_option("--n-values", o.n_values)->delimiter(',');
  app->add_option("--s-values", o.s_values)->delimiter(',');
  app->add_option("--t-values", o.t_values)->delimiter(',');
  app->add_option("--h-values", o.h_values)->delimiter(',');
  app->add_option("--r-values", o.r_values)->delimiter(',');
  app->add_option("--x0", o.x0)->delimiter(',');
  app->add_option("--format", o.formats, "csv, json, plot-data (repeatable)")->delimiter(',');
  app->add_flag("--resume", o.resume, "reuse per-grid-point partial files under <out>/partial");
}

ExperimentConfig build_config(ExperimentId id, const Overrides& o) {
  ExperimentConfig c;
  if (!o.config.empty()) c = load_config(o.config);
  c.experiment = id;
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output_dir = *o.out;
  if (o.replicas) c.replicas = *o.replicas;
  if (o.n) c.n = *o.n;
  if (o.draws) c.draws = *o.draws;
  if (o.K) c.K = *o.K;
  if (o.model) c.model.family = *o.model;
  if (o.d) c.model.d = *o.d;
  if (o.schedule) c.schedule.kind = *o.schedule;
  if (o.gamma) c.schedule.gamma = *o.gamma;
  if (o.beta) c.beta = *o.beta;
  if (o.t) c.t = *o.t;
  if (o.step) c.step = *o.step;
  if (o.delta) c.delta = *o.delta;
  if (o.optimizer) c.optimizer = *o.optimizer;
  if (o.policy) c.policy = *o.policy == "serial" ? ExecutionPolicy::Serial : ExecutionPolicy::Parallel;
  if (o.n_values) c.n_values = *o.n_values;
  if (o.s_values) c.s_values = *o.s_values;
  if (o.t_values) c.t_values = *o.t_values;
  if (o.h_values) c.h_values = *o.h_values;
  if (o.r_values) c.r_values = *o.r_values;
  if (o.x0) c.x0 = *o.x0;
  if (o.negative_control) c.negative_control = true;
  c.validate();
  return c;
}

int write_and_report(const ExperimentResult& r, const fs::path& dir, const std::vector<std::string>& formats) {
  for (const auto& f : formats)
    for (const auto& p : emit(r, parse_emit_format(f), dir)) std::cerr << "wrote " << p.string() << "\n";
  for (const auto& v : r.verdicts)
    std::printf("%-48s %s  margin %.6g  %s\n", v.name.c_str(), v.pass ? "PASS" : "FAIL", v.margin + 0.0, v.detail.c_str());
  for (const auto& e : r.errors) std::printf("error at %s: %s\n", e.key.c_str(), e.message.c_str());
  std::printf("%s: %zu rows, %zu verdicts, %zu errors, %.2f s\n", r.experiment.c_str(), r.rows.size(),
              r.verdicts.size(), r.errors.size(), r.wall_clock_s);
  if (!r.errors.empty()) return 4;
  return r.all_pass() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sgldlab: SGLD / simulated-annealing experiments"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    ExperimentId id;
    const char* help;
  };
  const Sub subs[] = {
      {"bounds-report", ExperimentId::BoundsReport, "Every explicit constant for a model, schedule and time"},
      {"gen-gap", ExperimentId::GenGap, "Generalization gap vs n with the sqrt(log(n+1)/n) envelope"},
      {"sa-convergence", ExperimentId::SaConvergence, "SA excess loss at alpha(s, s^(2/3)) over s"},
      {"sa-discretization", ExperimentId::SaDiscretization, "Continuous vs discretized SA under shared noise"},
      {"rademacher-study", ExperimentId::RademacherStudy, "Empirical Rademacher complexity vs covering bounds"},
      {"lemma-suite", ExperimentId::LemmaSuite, "Verdict table for every checked inequality"},
  };
  std::vector<Overrides> overrides(std::size(subs) + 1);
  std::vector<CLI::App*> apps;
  for (std::size_t i = 0; i < std::size(subs); ++i) {
    apps.push_back(app.add_subcommand(subs[i].name, subs[i].help));
    add_common(apps.back(), overrides[i]);
  }
  apps.back()->add_flag("--negative-control", overrides[std::size(subs) - 1].negative_control,
                        "declare m doubled for every model");

  Overrides& run_o = overrides.back();
  std::string which;
  auto* run = app.add_subcommand("run", "Simulate one process: sgld | sa | any process name");
  run->add_option("process", which, "sgld | sa | sgld-discrete | sgld-continuous | sa-continuous | sa-discrete | gradient-flow")
      ->required();
  add_common(run, run_o);

  std::string input, emit_out = ".";
  std::vector<std::string> emit_formats{"csv"};
  auto* emit_cmd = app.add_subcommand("emit", "Re-emit a JSON result as csv, json or plot-data");
  emit_cmd->add_option("result", input, "result JSON")->required()->check(CLI::ExistingFile);
  emit_cmd->add_option("--format", emit_formats)->delimiter(',');
  emit_cmd->add_option("-o,--out", emit_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (emit_cmd->parsed()) {
      const auto r = read_result(input);
      for (const auto& f : emit_formats)
        for (const auto& p : emit(r, parse_emit_format(f), emit_out)) std::cerr << "wrote " << p.string() << "\n";
      return 0;
    }
    ExperimentConfig cfg;
    if (run->parsed()) {
      cfg = build_config(ExperimentId::Run, run_o);
      cfg.process = which;
    } else {
      for (std::size_t i = 0; i < std::size(subs); ++i)
        if (apps[i]->parsed()) cfg = build_config(subs[i].id, overrides[i]);
    }
    const Overrides& o = run->parsed() ? run_o : overrides[static_cast<std::size_t>(
        std::find_if(apps.begin(), apps.end(), [](CLI::App* a) { return a->parsed(); }) - apps.begin())];
    const fs::path out = resolve_output_dir(cfg);
    if (run->parsed()) {
      cfg.validate();
      sgld::TrajectoryEnsemble ens;
      const auto result = run_process(cfg, {}, &ens);
      fs::create_directories(out);
      const fs::path traj = out / "run-trajectories.csv";
      std::ofstream(traj) << sgld::trajectory_csv(ens);
      std::cerr << "wrote " << traj.string() << "\n";
      return write_and_report(result, out, o.formats);
    }
    const auto result = run_experiment(cfg, o.resume ? out / "partial" : fs::path{});
    return write_and_report(result, out, o.formats);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
