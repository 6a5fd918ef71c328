#include <benchmark/benchmark.h>

#include "badmarket/builders.hpp"
#include "badmarket/demand.hpp"
#include "badmarket/experiments.hpp"
#include "badmarket/solver.hpp"
#include "badmarket/welfare.hpp"

using namespace badmarket;

static void BM_SolveGarbage(benchmark::State& state) {
  const Economy e = build_garbage_economy(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium(e));
}
BENCHMARK(BM_SolveGarbage)->Arg(120)->Arg(1200)->Unit(benchmark::kMillisecond);

static void BM_SolveHara(benchmark::State& state) {
  const Economy e = build_hara_economy(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_equilibrium(e));
}
BENCHMARK(BM_SolveHara)->Arg(10)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_VerifyHaraOracle(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Economy e = build_hara_economy(n);
  const EquilibriumCertificate c = hara_oracle(n);
  for (auto _ : state) benchmark::DoNotOptimize(verify_equilibrium(e, c, 1e-10).passed());
}
BENCHMARK(BM_VerifyHaraOracle)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_ClosedFormDemand(benchmark::State& state) {
  const Economy e = build_hara_economy(1);
  Vector p(2);
  p << -0.4, 0.6;
  const Context ctx = Context::neutral(2);
  for (auto _ : state) benchmark::DoNotOptimize(demand(e.consumers[0], p, 1.0, ctx));
}
BENCHMARK(BM_ClosedFormDemand);

static void BM_FallbackDemand(benchmark::State& state) {
  const Economy e = build_hara_economy(1);
  Vector p(2);
  p << -0.4, 0.6;
  for (auto _ : state) benchmark::DoNotOptimize(demand_projected_gradient(e.consumers[0], p, 1.0));
}
BENCHMARK(BM_FallbackDemand);

static void BM_ParetoSearch(benchmark::State& state) {
  Economy e = build_one_agent_economy();
  e.firms = {Technology::disposal(2, "dump")};
  e.consumers[0].shares = Vector::Ones(1);
  EquilibriumCertificate c;
  c.price = Vector(2);
  c.price << 0.0, 1.0;
  c.bundles = {c.price};
  c.activities = {Vector::Zero(activity_count(e.firms[0]))};
  c.productions = {Vector::Zero(2)};
  c.free_disposal = true;
  for (auto _ : state) benchmark::DoNotOptimize(search_pareto_improvement(e, c, state.range(0), 1));
}
BENCHMARK(BM_ParetoSearch)->Arg(10000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
