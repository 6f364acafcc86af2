#include <cstdint>
#include <vector>

#include <benchmark/benchmark.h>

#include "yardsale/engine.hpp"
#include "yardsale/network.hpp"
#include "yardsale/observables.hpp"

using namespace yardsale;

namespace {

Network make(int kind, std::size_t n) {
  switch (kind) {
    case 0: return make_complete(n);
    case 1: return make_ring(n);
    default: return make_erdos_renyi(n, 10.0, 1);
  }
}

void BM_Sweep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(1));
  const auto net = make(static_cast<int>(state.range(0)), n);
  const ExchangeParams params(0.6, 0.1);
  WealthState w = WealthState::even(n);
  Rng rng = make_stream(1);
  Sweeper sweeper;
  for (auto _ : state) {
    sweeper(w, net, params, rng);
    benchmark::DoNotOptimize(w.wealth.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
  state.SetLabel(net.topology().label());
}
BENCHMARK(BM_Sweep)->ArgsProduct({{0, 1, 2}, {400, 900}});

void BM_Correlation(benchmark::State& state) {
  const std::size_t n = 400;
  const auto max_lag = static_cast<std::size_t>(state.range(0));
  const auto net = make_complete(n);
  const ExchangeParams params(0.6, 0.1);
  WealthState w = WealthState::even(n);
  Rng rng = make_stream(2);
  Trajectory traj(n);
  traj.reserve(11 * max_lag);
  for (std::size_t t = 0; t < 11 * max_lag; ++t) {
    sweep(w, net, params, rng);
    traj.push(w.wealth);
  }
  for (auto _ : state) benchmark::DoNotOptimize(correlation(traj, max_lag));
}
BENCHMARK(BM_Correlation)->Arg(64)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_FreezeStatus(benchmark::State& state) {
  const std::size_t n = 900;
  const auto net = make(static_cast<int>(state.range(0)), n);
  WealthState w = WealthState::even(n);
  Rng rng = make_stream(3);
  for (int t = 0; t < 200; ++t) sweep(w, net, ExchangeParams(0.2, 0.1), rng);
  for (auto _ : state) benchmark::DoNotOptimize(freeze_status(w.wealth, net));
  state.SetLabel(net.topology().label());
}
BENCHMARK(BM_FreezeStatus)->Arg(1)->Arg(2);

void BM_FindLras(benchmark::State& state) {
  const std::size_t n = 900;
  const auto net = make_ring(n);
  WealthState w = WealthState::even(n);
  Rng rng = make_stream(4);
  for (int t = 0; t < 200; ++t) sweep(w, net, ExchangeParams(0.2, 0.1), rng);
  for (auto _ : state) benchmark::DoNotOptimize(find_lras(w.wealth, net));
}
BENCHMARK(BM_FindLras);

}  // namespace

BENCHMARK_MAIN();
