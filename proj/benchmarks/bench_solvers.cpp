#include <benchmark/benchmark.h>

#include "kfsslab/gadgets.hpp"
#include "kfsslab/riccati.hpp"
#include "kfsslab/solvers.hpp"

using namespace kfsslab;

namespace {

X3CInstance sample_x3c(int tau) {
  const std::vector<std::array<int, 3>> pool{
      {1, 2, 3}, {4, 5, 6}, {1, 4, 5}, {2, 3, 6}, {1, 2, 4}, {3, 5, 6}};
  return {2, {pool.begin(), pool.begin() + tau}};
}

}  // namespace

static void BM_DareExample1(benchmark::State& state) {
  const auto model = build_example1(0.9, static_cast<double>(state.range(0)));
  const auto sel = SelectionVector(3, true);
  for (auto _ : state) benchmark::DoNotOptimize(dare_steady_state(model, sel).trace());
}
BENCHMARK(BM_DareExample1)->Arg(10)->Arg(1000)->Arg(100000);

static void BM_DareKfssGadget(benchmark::State& state) {
  const auto gadget = build_kfss_gadget(sample_x3c(static_cast<int>(state.range(0))));
  const auto sel = SelectionVector(gadget.model.sensors(), true);
  const auto opts = SolverOptions::gadget();
  for (auto _ : state)
    benchmark::DoNotOptimize(dare_steady_state(gadget.model, sel, opts).trace());
}
BENCHMARK(BM_DareKfssGadget)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

static void BM_GreedySelect(benchmark::State& state) {
  const auto model = build_example1(0.9, 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(greedy_select(model, 2, Metric::Priori).trace);
}
BENCHMARK(BM_GreedySelect);

static void BM_ExhaustiveSelect(benchmark::State& state) {
  const auto model = build_example1(0.9, 100.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        exhaustive_select(model, model.selection_costs, 2.0, Metric::Priori).trace);
}
BENCHMARK(BM_ExhaustiveSelect);

static void BM_DecideViaKfsa(benchmark::State& state) {
  const auto x = sample_x3c(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(x3c_decide_via_kfsa(x, 1.0, Algorithm::Exhaustive).answer);
}
BENCHMARK(BM_DecideViaKfsa)->DenseRange(2, 6, 2)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
