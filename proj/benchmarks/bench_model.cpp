#include <benchmark/benchmark.h>

#include "symplan/harness.hpp"
#include "symplan/trainer.hpp"

using namespace symplan;

namespace {

struct Setup {
  ExperimentConfig cfg;
  PreparedData data;
  Setup()
      : cfg(ExperimentConfig::from_kv(KeyValueConfig::from_text("domain = gripper\n"))),
        data(prepare_data(cfg, true, false)) {}
};

Setup& setup() {
  static Setup s;
  return s;
}

}  // namespace

static void BM_EncoderForward(benchmark::State& state) {
  auto& s = setup();
  Model<float> m = build_model(s.data.model_config, 1);
  Rng rng(3);
  const LabeledSample sample = sample_pair(s.data.training, rng);
  const TokenizedPair pair =
      build_pair(sample, s.data.vocab, RenamingMode::rename_both, false, false, rng);
  for (auto _ : state) {
    Graph<float> g;
    g.recording = false;
    auto b = m.bind(g);
    benchmark::DoNotOptimize(m.encoder_forward(b, pair.xa).enc_out.val().sum());
  }
}
BENCHMARK(BM_EncoderForward)->Unit(benchmark::kMicrosecond);

static void BM_TrainStep(benchmark::State& state) {
  auto& s = setup();
  Model<float> m = build_model(s.data.model_config, 1);
  AdamW opt(0.9, 0.999, 1e-8, 0.1);
  TrainConfig tc = TrainConfig::desk();
  tc.batch_size = static_cast<int>(state.range(0));
  Rng srng(5), drng(7);
  std::vector<TokenizedPair> batch;
  for (int i = 0; i < tc.batch_size; ++i) {
    batch.push_back(build_pair(sample_pair(s.data.training, srng), s.data.vocab,
                               RenamingMode::rename_both, true, false, srng));
  }
  std::int64_t step = 500;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_step(m, opt, batch, tc, step++, drng).loss.total);
  }
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_RegroundingDecode(benchmark::State& state) {
  auto& s = setup();
  Model<float> m = build_model(s.data.model_config, 1);
  const GeneratedInstance inst = generate({Domain::gripper, 3, 1});
  const GroundTask task(inst.problem);
  DecodeConfig dc;
  dc.strategy = Strategy::regrounding;
  dc.max_tokens = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(decode(task, s.data.vocab, m, dc).tokens_generated);
  }
}
BENCHMARK(BM_RegroundingDecode)->Unit(benchmark::kMillisecond);
