#include <benchmark/benchmark.h>

#include "symplan/domains.hpp"
#include "symplan/expansion.hpp"

using namespace symplan;

static void BM_GroundGripper(benchmark::State& state) {
  const auto inst = generate({Domain::gripper, static_cast<int>(state.range(0)), 1});
  for (auto _ : state) {
    benchmark::DoNotOptimize(ground_actions(inst.problem));
  }
}
BENCHMARK(BM_GroundGripper)->Arg(4)->Arg(8)->Arg(16);

static void BM_ExpandGripper(benchmark::State& state) {
  const auto inst = generate({Domain::gripper, static_cast<int>(state.range(0)), 1});
  for (auto _ : state) {
    const Expansion e = expand(GroundTask(inst.problem));
    benchmark::DoNotOptimize(e.states.size());
    state.counters["states"] = static_cast<double>(e.states.size());
  }
}
BENCHMARK(BM_ExpandGripper)->Arg(4)->Arg(6)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_SamplePair(benchmark::State& state) {
  const auto inst = generate({Domain::gripper, 6, 1});
  const Expansion e = expand(GroundTask(inst.problem));
  Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_pair({&e}, rng));
  }
}
BENCHMARK(BM_SamplePair);

static void BM_ApplySuccessors(benchmark::State& state) {
  const auto inst = generate({Domain::blocksworld, 6, 1});
  const GroundTask task(inst.problem);
  for (auto _ : state) {
    int n = 0;
    for (const auto& a : task.active) {
      if (task.applicable(task.init_ids, a)) {
        benchmark::DoNotOptimize(task.apply(task.init_ids, a));
        ++n;
      }
    }
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_ApplySuccessors);
