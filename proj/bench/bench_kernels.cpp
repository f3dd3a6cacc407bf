// Serial reference vs OpenMP kernels: stability-chart sweep and bifurcation-function grid.

#include <benchmark/benchmark.h>

#include <vector>

#include "mdkit/averaging.hpp"
#include "mdkit/floquet_chart.hpp"

namespace {

mdkit::floquet::ChartSpec chart_spec(int n_delta) {
  mdkit::floquet::ChartSpec s;
  s.delta = {0.0, 3.0, n_delta};
  s.epsilon = {0.0, 1.0, 11};
  s.integrator = mdkit::IntegratorOptions::fixed(1000, mdkit::kPi);
  return s;
}

void BM_ChartSerial(benchmark::State& state) {
  const auto spec = chart_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdkit::floquet::sweep_chart_serial(spec));
  state.SetItemsProcessed(state.iterations() * spec.delta.count * spec.epsilon.count);
}

void BM_ChartParallel(benchmark::State& state) {
  const auto spec = chart_spec(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdkit::floquet::sweep_chart(spec));
  state.SetItemsProcessed(state.iterations() * spec.delta.count * spec.epsilon.count);
}

std::vector<double> axis(int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(-1.5 + 3.0 * i / (n - 1));
  return v;
}

const mdkit::ModelParams kModel = mdkit::ModelParams::resonant(1.0, 0.01, 1.0);
const mdkit::ForcingSeries kForcing{{1.0, 0.3, 0.1}, {0.2}};

void BM_BifurcationSerial(benchmark::State& state) {
  const auto xs = axis(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdkit::averaging::bifurcation_grid_serial(kModel, kForcing, xs, xs));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(xs.size() * xs.size()));
}

void BM_BifurcationParallel(benchmark::State& state) {
  const auto xs = axis(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mdkit::averaging::bifurcation_grid(kModel, kForcing, xs, xs));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(xs.size() * xs.size()));
}

}  // namespace

BENCHMARK(BM_ChartSerial)->Arg(21)->Arg(101)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ChartParallel)->Arg(21)->Arg(101)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BifurcationSerial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BifurcationParallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
