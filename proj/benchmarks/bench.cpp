#include <benchmark/benchmark.h>

#include <numbers>

#include "rou/characteristic.hpp"
#include "rou/fundamental.hpp"
#include "rou/sde_sim.hpp"
#include "rou/spectral_models.hpp"
#include "rou/stationary.hpp"

using namespace rou;
using std::numbers::pi;

namespace {

ModeEntry delayed_mode() { return {-pi * pi, -pi * pi, 0.0, 1.0, 1}; }

DelayKernel delayed_kernel() { return DelayKernel(0.1, 0.5, BetaKernel::zero()); }

ModeSystem heat_system(int K) {
  ModeSystem sys;
  sys.domain_length = 1.0;
  for (const auto& e : dirichlet_modes(1.0, K))
    sys.modes.push_back({e.mu, 0.0, e.mu, e.k == 1 ? 1.0 : 0.0, e.k});
  return sys;
}

void BM_SolveFundamental(benchmark::State& state) {
  auto m = delayed_mode();
  auto k = delayed_kernel();
  double dt = 1.0 / double(state.range(0));
  for (auto _ : state) {
    auto g = solve_fundamental(m, k, 5.0, 0.1 * dt);
    benchmark::DoNotOptimize(g.g.back());
  }
}
BENCHMARK(BM_SolveFundamental)->Arg(10)->Arg(40)->Arg(160);

void BM_RightmostRoot(benchmark::State& state) {
  CharProblem p{delayed_kernel(), delayed_mode()};
  for (auto _ : state) {
    auto rep = rightmost_root(p, -30.0, 1.0, 40.0);
    benchmark::DoNotOptimize(rep.rightmost);
  }
}
BENCHMARK(BM_RightmostRoot);

void BM_SpectralAbscissa(benchmark::State& state) {
  auto sys = heat_system(int(state.range(0)));
  DelayKernel k(1.0, 0.0, BetaKernel::exponential(0.3, -1.0));
  for (auto _ : state) {
    auto rep = spectral_abscissa(sys, k);
    benchmark::DoNotOptimize(rep.abscissa);
  }
}
BENCHMARK(BM_SpectralAbscissa)->Arg(4)->Arg(10);

void BM_CovarianceTable(benchmark::State& state) {
  auto m = delayed_mode();
  auto k = delayed_kernel();
  double dt = 1e-3;
  std::vector<FundamentalRow> g{solve_fundamental(m, k, 6.0, dt)};
  std::vector<double> f{1.0};
  for (auto _ : state) {
    auto K = covariance(g, f, -0.1, 0.3);
    benchmark::DoNotOptimize(K.entries[0][0][0]);
  }
}
BENCHMARK(BM_CovarianceTable);

void BM_EnsembleSim(benchmark::State& state) {
  ModeSystem sys = heat_system(4);
  DelayKernel k(0.1, 0.5, BetaKernel::zero());
  for (auto& m : sys.modes) {
    m.m1 = m.mu;
    m.m2 = 0.0;
  }
  SimConfig cfg{2.5e-3, 1.0, int(state.range(0)), 7, 0.0, false};
  for (auto _ : state) {
    auto ens = simulate_ensemble(sys, k, cfg, {1.0}, 4);
    benchmark::DoNotOptimize(ens.samples.size());
  }
}
BENCHMARK(BM_EnsembleSim)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
