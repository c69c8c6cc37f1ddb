#include <benchmark/benchmark.h>

#include <cmath>

#include "pollnet/branching.hpp"
#include "pollnet/fluid.hpp"
#include "pollnet/model.hpp"
#include "pollnet/optimizer.hpp"
#include "pollnet/simulator.hpp"

using namespace pollnet;

namespace {

NetworkSpec reference(bool exhaustive) {
  NetworkSpec s;
  s.n = 3;
  s.lambda = {1.0, 1.0, 1.0};
  s.service = {ServiceDistribution::exponential(8.0), ServiceDistribution::exponential(5.0),
               ServiceDistribution::exponential(2.0)};
  s.routing = Matrix(3, 3);
  const double p[3][3] = {{0.1, 0.25, 0.2}, {0.2, 0.1, 0.2}, {0.2, 0.1, 0.25}};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.routing(i, j) = p[i][j];
  s.gating.assign(3, exhaustive ? GatingIndexDistribution::exhaustive()
                                : GatingIndexDistribution::point(1));
  return s;
}

void BM_derive(benchmark::State& state) {
  const NetworkSpec s = reference(true);
  for (auto _ : state) benchmark::DoNotOptimize(derive(s));
}
BENCHMARK(BM_derive);

void BM_perron(benchmark::State& state) {
  const NetworkSpec s = reference(true);
  const Matrix m = build_matrices(derive(s), s).M;
  for (auto _ : state) benchmark::DoNotOptimize(perron(m));
}
BENCHMARK(BM_perron);

void BM_evaluate_pipeline(benchmark::State& state) {
  const NetworkSpec s = reference(true);
  const GatingAssignment g = {kGateInf, 4, 1};
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(s, g));
}
BENCHMARK(BM_evaluate_pipeline);

void BM_fluid_eval(benchmark::State& state) {
  const NetworkSpec s = reference(true);
  const auto dq = derive(s);
  const auto om = build_matrices(dq, s);
  const auto sk = build_skeleton(s, dq, om, perron(om.M));
  double t = 0.001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sk.eval(t));
    t = t * 1.01 + 1e-4;
    if (t > 1e6) t = 0.001;
  }
}
BENCHMARK(BM_fluid_eval);

void BM_run_horizon(benchmark::State& state) {
  const NetworkSpec s = reference(true);
  const double theta = 3.7496900946275864;
  SimConfig cfg;
  cfg.seed = 12;
  cfg.horizon = std::pow(theta, state.range(0));
  std::int64_t events = 0;
  for (auto _ : state) {
    const SimTrace tr = run(s, cfg);
    events += tr.event_count;
    benchmark::DoNotOptimize(tr);
  }
  state.SetItemsProcessed(events);
}
BENCHMARK(BM_run_horizon)->Arg(4)->Arg(6);

void BM_session_offspring(benchmark::State& state) {
  const NetworkSpec s = reference(true);
  RngStream rng(77);
  for (auto _ : state) benchmark::DoNotOptimize(session_offspring_sample(s, 2, rng));
}
BENCHMARK(BM_session_offspring);

}  // namespace

BENCHMARK_MAIN();
