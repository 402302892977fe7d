#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

#include "oorarch/pareto.hpp"
#include "oorarch/policy.hpp"
#include "oorarch/simulator.hpp"
#include "oorarch/surrogate.hpp"
#include "oorarch/vehicle.hpp"

using namespace oorarch;

namespace {

const ScenarioParams& chemical() {
  static const ScenarioParams p = load_scenario(OORARCH_SCENARIO_DIR "/chemical_baseline.json");
  return p;
}

TrainingSet wave_set(int n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> t(5.0, 15.0), m(1500.0, 3500.0);
  TrainingSet ts;
  for (int i = 0; i < n; ++i) {
    const DesignPoint x{t(rng), m(rng)};
    ts.add(x, std::sin(x.t_life_yr) + 1e-3 * x.m_p_des);
  }
  return ts;
}

std::vector<double> zdt1(const std::vector<double>& x) {
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += x[i];
  const double g = 1.0 + 9.0 * s / static_cast<double>(x.size() - 1);
  return {-x[0], -g * (1.0 - std::sqrt(x[0] / g))};
}

}  // namespace

static void BM_DesignVehicle(benchmark::State& state) {
  const ScenarioParams& p = chemical();
  double m = 1500.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(design_vehicle(p, {15.0, m}));
    m = m < 3500.0 ? m + 1.0 : 1500.0;
  }
}
BENCHMARK(BM_DesignVehicle);

static void BM_PolicyContext(benchmark::State& state) {
  const ScenarioParams& p = chemical();
  for (auto _ : state) benchmark::DoNotOptimize(PolicyContext(p, {15.0, 2600.0}));
}
BENCHMARK(BM_PolicyContext)->Unit(benchmark::kMicrosecond);

static void BM_Decision1(benchmark::State& state) {
  const ScenarioParams& p = chemical();
  const DesignPoint x{15.0, 2600.0};
  const PolicyContext ctx(p, x);
  const auto b = design_vehicle(p, x);
  SatelliteState sat;
  sat.t_life = ctx.law().t_life_steps();
  sat.m_dry = b.m_dry;
  sat.isp = p.isp;
  sat.m_p_rem = 150.0;
  for (auto _ : state) benchmark::DoNotOptimize(decide_replace_or_refuel(ctx, 200, sat, {1.0, 200}));
}
BENCHMARK(BM_Decision1)->Unit(benchmark::kMicrosecond);

static void BM_Lifecycle(benchmark::State& state) {
  const ScenarioParams& p = chemical();
  const DesignPoint x{15.0, static_cast<double>(state.range(0))};
  const PolicyContext ctx(p, x);
  std::uint64_t j = 0;
  for (auto _ : state) {
    RngStream rng(1, 0, j++);
    benchmark::DoNotOptimize(run_lifecycle(ctx, rng).npv);
  }
}
BENCHMARK(BM_Lifecycle)->Arg(1800)->Arg(2600)->Arg(3500)->Unit(benchmark::kMicrosecond);

static void BM_GpFit(benchmark::State& state) {
  const TrainingSet ts = wave_set(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(fit(ts, Kernel::kMatern52));
}
BENCHMARK(BM_GpFit)->Arg(50)->Arg(231)->Unit(benchmark::kMillisecond);

static void BM_GpPredict(benchmark::State& state) {
  const SurrogateModel m = fit(wave_set(231), Kernel::kMatern52);
  double t = 5.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(m.predict({t, 2500.0}));
    t = t < 15.0 ? t + 0.01 : 5.0;
  }
}
BENCHMARK(BM_GpPredict)->Unit(benchmark::kMicrosecond);

static void BM_NonDominated(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<Objectives> pts(static_cast<std::size_t>(state.range(0)));
  for (auto& q : pts) q = {n01(rng), n01(rng)};
  for (auto _ : state) benchmark::DoNotOptimize(non_dominated(pts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NonDominated)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNLogN);

static void BM_Nsga2Zdt1(benchmark::State& state) {
  MooConfig cfg;
  cfg.population = 100;
  cfg.generations = static_cast<int>(state.range(0));
  const std::vector<double> lo(30, 0.0), hi(30, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(nsga2(lo, hi, zdt1, cfg));
}
BENCHMARK(BM_Nsga2Zdt1)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_Hypervolume(benchmark::State& state) {
  std::vector<Objectives> pts;
  for (int i = 0; i < state.range(0); ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(state.range(0));
    pts.push_back({x, 1.0 - std::sqrt(x)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(hypervolume(pts, {-0.1, -0.1}));
}
BENCHMARK(BM_Hypervolume)->Arg(100)->Arg(1000);

BENCHMARK_MAIN();
