#include <vector>

#include "benchmark/benchmark.h"
#include "swrm/detector.h"
#include "swrm/model.h"
#include "swrm/synthetic.h"
#include "swrm/trainer.h"

namespace {

struct Fixture {
  swrm::SyntheticCorpus syn;
  swrm::MockLm lm;
  swrm::ModelConfig config;

  explicit Fixture(Eigen::Index dim)
      : syn(make(dim)), lm(syn.lm), config(swrm::preset_config("mosi-speechbrain")) {
    config.d_x = lm.dim();
    config.visual_dim = 6;
    config.acoustic_dim = 5;
    config.k = 20;
  }

  static swrm::SyntheticCorpus make(Eigen::Index dim) {
    swrm::SyntheticSpec spec;
    spec.utterances = 64;
    spec.embedding_dim = dim;
    return swrm::make_synthetic_corpus(spec);
  }
};

void BM_Detect(benchmark::State& state) {
  const Fixture fx(16);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& u = fx.syn.split.utterances[i++ % fx.syn.split.size()];
    benchmark::DoNotOptimize(swrm::detect(u.tokens, fx.lm, fx.syn.lexicon, 20));
  }
}
BENCHMARK(BM_Detect);

void BM_Predict(benchmark::State& state) {
  const Fixture fx(state.range(0));
  const swrm::SwrmModel model(fx.config, 1111);
  const auto samples = swrm::prepare_split(fx.syn.split, fx.lm, fx.syn.lexicon, fx.config);
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(model.predict(samples[i++ % samples.size()]));
}
BENCHMARK(BM_Predict)->Arg(16)->Arg(64)->Arg(256);

void BM_TrainStep(benchmark::State& state) {
  const Fixture fx(state.range(0));
  swrm::SwrmModel model(fx.config, 1111);
  const auto samples = swrm::prepare_split(fx.syn.split, fx.lm, fx.syn.lexicon, fx.config);
  std::vector<const swrm::PreparedSample*> batch;
  for (std::size_t i = 0; i < 16; ++i) batch.push_back(&samples[i]);
  swrm::Adam adam(5e-5, 0.9, 0.999, 1e-8);
  const swrm::CopyLabelGenerator copy;
  for (auto _ : state) {
    swrm::zero_grads(model);
    benchmark::DoNotOptimize(swrm::accumulate_batch_gradients(model, batch, copy));
    adam.step(model);
  }
  state.SetItemsProcessed(state.iterations() * 16);
}
BENCHMARK(BM_TrainStep)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace
