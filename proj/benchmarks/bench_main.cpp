#include <benchmark/benchmark.h>

#include <random>

#include "regretforge/adversary.hpp"
#include "regretforge/bench.hpp"
#include "regretforge/generators.hpp"
#include "regretforge/navigator.hpp"
#include "regretforge/policy.hpp"
#include "regretforge/site.hpp"
#include "regretforge/web_env.hpp"

using namespace regretforge;

namespace {

const Website& shopping4() {
  static const Website site = render(select_tasks("shopping:4").at(0).spec);
  return site;
}

void BM_render_dr(benchmark::State& state) {
  std::mt19937_64 rng(1);
  for (auto _ : state) benchmark::DoNotOptimize(render(dr_sample(3, 8, rng)));
}
BENCHMARK(BM_render_dr);

void BM_oracle_episode(benchmark::State& state) {
  OraclePolicy oracle;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rollout(oracle, shopping4(), {}, seed++, seed));
}
BENCHMARK(BM_oracle_episode);

void BM_env_step(benchmark::State& state) {
  auto ep = reset(shopping4(), 3);
  const auto action = oracle_policy(ep.state);
  for (auto _ : state) {
    auto s = ep.state;
    benchmark::DoNotOptimize(step(s, action));
  }
}
BENCHMARK(BM_env_step);

void BM_navigator_act(benchmark::State& state) {
  Navigator nav(NavigatorConfig{}, 0);
  const auto obs = reset(shopping4(), 3).observation;
  std::mt19937_64 rng(2);
  for (auto _ : state) benchmark::DoNotOptimize(nav.act(obs, rng, false));
}
BENCHMARK(BM_navigator_act);

void BM_a2c_update(benchmark::State& state) {
  Navigator nav(NavigatorConfig{}, 0);
  NavigatorPolicy policy(nav, false);
  std::mt19937_64 rng(3);
  const auto batch = collect(policy, render(select_tasks("login:2").at(0).spec), 4, {}, rng).trajectories;
  std::size_t steps = 0;
  for (const auto& t : batch) steps += t.steps.size();
  for (auto _ : state) benchmark::DoNotOptimize(a2c_update(nav, batch, {}));
  state.counters["steps"] = static_cast<double>(steps);
}
BENCHMARK(BM_a2c_update)->Unit(benchmark::kMillisecond);

void BM_adversary_sample(benchmark::State& state) {
  AdversaryPolicy adv(AdversaryConfig{}, 0);
  std::mt19937_64 rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(adv.sample(rng));
}
BENCHMARK(BM_adversary_sample)->Unit(benchmark::kMicrosecond);

void BM_adversary_update(benchmark::State& state) {
  AdversaryPolicy adv(AdversaryConfig{}, 0);
  std::mt19937_64 rng(5);
  const auto sample = adv.sample(rng);
  AdversaryLossTerms terms;
  terms.regret = 0.3;
  terms.best_return = 0.5;
  terms.lambda_budget = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(adversary_update(adv, sample, terms, {}, 5.0));
}
BENCHMARK(BM_adversary_update)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
