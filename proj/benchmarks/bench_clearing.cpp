#include <memory>

#include <benchmark/benchmark.h>

#include "zonalcap/qp_solver.hpp"
#include "zonalcap/synthetic.hpp"
#include "zonalcap/tso_optimizer.hpp"

using namespace zonalcap;

static void BM_OneZone(benchmark::State& state) {
  QpProblem p;
  p.hessian_diag = Eigen::Vector2d(1.0, 0.0);
  p.cost = Eigen::Vector2d(-100.0, 20.0);
  p.constraints.resize(1, 2);
  p.constraints.insert(0, 0) = 1.0;
  p.constraints.insert(0, 1) = -1.0;
  p.rhs = Eigen::VectorXd::Zero(1);
  p.lower = Eigen::Vector2d(0.0, 0.0);
  p.upper = Eigen::Vector2d(1e300, 50.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p));
}
BENCHMARK(BM_OneZone);

namespace {

struct Week {
  std::shared_ptr<const Network> network;
  std::shared_ptr<const ScenarioWeek> week;
};

Week synthetic_week(std::size_t zones, std::size_t hours) {
  SyntheticSpec spec;
  spec.zones = zones;
  spec.weeks = 1;
  spec.hours = hours;
  const Scenario sc = generate_synthetic(spec);
  return {sc.network, std::make_shared<const ScenarioWeek>(calibrate_week(*sc.network, sc.generators, sc.weeks[0]))};
}

}  // namespace

// Coupled week; args are zones and hours.
static void BM_WeekSolve(benchmark::State& state) {
  const auto w = synthetic_week(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  const auto p = ClearingProblem::whole_week(w.network, w.week);
  for (auto _ : state) {
    const auto s = solve(p);
    if (!s.ok()) state.SkipWithError("week did not solve");
    benchmark::DoNotOptimize(s.objective);
  }
}
BENCHMARK(BM_WeekSolve)->Args({6, 24})->Args({6, 168})->Args({18, 24})->Args({18, 168})->Unit(benchmark::kMillisecond);

// Base-case hourly enumeration over the Danish borders; arg is hours.
static void BM_HourlyEnumeration(benchmark::State& state) {
  const auto w = synthetic_week(6, static_cast<std::size_t>(state.range(0)));
  const auto rc = RestrictionCase::base(danish_border_lines(*w.network));
  for (auto _ : state) benchmark::DoNotOptimize(optimize_hourly(w.network, w.week, rc).total.system.tw);
  state.SetItemsProcessed(state.iterations() * state.range(0) * 243);
}
BENCHMARK(BM_HourlyEnumeration)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
