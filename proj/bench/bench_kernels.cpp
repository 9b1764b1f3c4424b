// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "seads/evaluation.hpp"
#include "seads/kernels.hpp"
#include "seads/planner.hpp"
#include "seads/training.hpp"

using namespace seads;

namespace {

kernels::EpisodeSource lights_source() {
  EnvConfig env;
  env.game = GameSpec::lights_out(5);
  return {env, 25, 5, 7};
}

void BM_CollectSerial(benchmark::State& state) {
  const auto src = lights_source();
  const ScriptedSkills policy(src.env);
  std::uint64_t first = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::collect_episodes_serial(src, policy, first, 32));
    first += 32;
  }
}
BENCHMARK(BM_CollectSerial)->Unit(benchmark::kMillisecond);

void BM_CollectParallel(benchmark::State& state) {
  const auto src = lights_source();
  const ScriptedSkills policy(src.env);
  std::uint64_t first = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::collect_episodes(src, policy, first, 32));
    first += 32;
  }
}
BENCHMARK(BM_CollectParallel)->Unit(benchmark::kMillisecond);

struct ScoringFixture {
  Rng rng = make_stream(3, 0);
  skills::ForwardModel model{25, 25, rng};
  std::vector<EpisodeRecord> episodes;
  std::vector<skills::SymbolicPair> pairs;

  ScoringFixture() {
    const auto src = lights_source();
    const ScriptedSkills policy(src.env);
    episodes = kernels::collect_episodes_serial(src, policy, 0, 512);
    for (const auto& e : episodes) pairs.push_back({&e.z0, &e.zT});
  }
};

void BM_ScoreSerial(benchmark::State& state) {
  static ScoringFixture f;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::score_pairs_serial(f.model, f.pairs));
}
BENCHMARK(BM_ScoreSerial)->Unit(benchmark::kMillisecond);

void BM_ScoreBatched(benchmark::State& state) {
  static ScoringFixture f;
  for (auto _ : state) benchmark::DoNotOptimize(kernels::score_pairs(f.model, f.pairs));
}
BENCHMARK(BM_ScoreBatched)->Unit(benchmark::kMillisecond);

void BM_SplitCountsSerial(benchmark::State& state) {
  const auto& boards = catalog_for(GameSpec::lights_out(5)).boards(5);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::split_counts_serial(boards));
}
BENCHMARK(BM_SplitCountsSerial)->Unit(benchmark::kMillisecond);

void BM_SplitCountsParallel(benchmark::State& state) {
  const auto& boards = catalog_for(GameSpec::lights_out(5)).boards(5);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::split_counts(boards));
}
BENCHMARK(BM_SplitCountsParallel)->Unit(benchmark::kMillisecond);

void eval_tasks(benchmark::State& state, bool parallel) {
  EnvConfig env;
  env.game = GameSpec::lights_out(5);
  const ScriptedSkills policy(env);
  const planning::GameSuccessors model(env.game);
  for (auto _ : state)
    benchmark::DoNotOptimize(eval_success(env, policy, model, {}, true, 4, 11, 4, parallel));
}

void BM_EvalSerial(benchmark::State& state) { eval_tasks(state, false); }
BENCHMARK(BM_EvalSerial)->Unit(benchmark::kMillisecond);

void BM_EvalParallel(benchmark::State& state) { eval_tasks(state, true); }
BENCHMARK(BM_EvalParallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
