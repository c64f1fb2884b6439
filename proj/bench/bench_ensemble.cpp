// Serial vs OpenMP-parallel ensemble kernels. Arg 0 = serial, 1 = parallel.
#include <benchmark/benchmark.h>

#include <vector>

#include "sgld/dynamics.hpp"
#include "sgld/rademacher.hpp"

using namespace sgld;

namespace {

ExecutionPolicy policy_of(const benchmark::State& st) {
  return st.range(0) ? ExecutionPolicy::Parallel : ExecutionPolicy::Serial;
}

void BM_RunSde(benchmark::State& st) {
  const auto model = LossModel::ripple(2, 1.0, 0.5);
  const auto S = draw_sample_set(model, 64, 1);
  const std::vector<double> x0{1.0, -1.0};
  SdeOptions o;
  o.t_end = 1.0;
  o.replicas = 256;
  o.noise = {1, 1e-2};
  o.policy = policy_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(run_sde(model, S, Process::SaContinuous, x0, Schedule::iterated_log(), o));
  st.SetItemsProcessed(st.iterations() * o.replicas);
}

void BM_RunSgldDiscrete(benchmark::State& st) {
  const auto model = LossModel::quadratic_data(1);
  const auto S = draw_sample_set(model, 64, 1);
  const std::vector<double> x0{2.0};
  SgldDiscreteOptions o;
  o.k_max = 1000;
  o.record_steps = {1000};
  o.replicas = 512;
  o.policy = policy_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(run_sgld_discrete(model, S, x0, o));
  st.SetItemsProcessed(st.iterations() * o.replicas);
}

void BM_EmpiricalRademacher(benchmark::State& st) {
  const auto model = LossModel::quadratic_data(1);
  const auto S = draw_sample_set(model, 32, 1);
  RademacherOptions o;
  o.R = 2.0;
  o.K = 200;
  o.policy = policy_of(st);
  for (auto _ : st) benchmark::DoNotOptimize(empirical_rademacher(model, S, o));
}

}  // namespace

BENCHMARK(BM_RunSde)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RunSgldDiscrete)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EmpiricalRademacher)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
