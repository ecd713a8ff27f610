#include <random>
#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "swrm/corpus.h"
#include "swrm/synthetic.h"

namespace {

void BM_PseudoAlign(benchmark::State& state) {
  const auto frames = static_cast<Eigen::Index>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  swrm::Matrix f(frames, 74);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = n(rng);
  for (auto _ : state) benchmark::DoNotOptimize(swrm::pseudo_align(f, 24));
  state.SetItemsProcessed(state.iterations() * frames);
}
BENCHMARK(BM_PseudoAlign)->Arg(16)->Arg(128)->Arg(1024);

void BM_Wer(benchmark::State& state) {
  const auto len = static_cast<std::size_t>(state.range(0));
  std::vector<std::string> gold, hyp;
  for (std::size_t i = 0; i < len; ++i) {
    gold.push_back("w" + std::to_string(i % 17));
    hyp.push_back(i % 5 == 0 ? "x" : "w" + std::to_string(i % 17));
  }
  for (auto _ : state) benchmark::DoNotOptimize(swrm::wer(gold, hyp));
}
BENCHMARK(BM_Wer)->Arg(10)->Arg(40)->Arg(160);

void BM_CorruptAndAudit(benchmark::State& state) {
  swrm::SyntheticSpec spec;
  spec.utterances = static_cast<std::size_t>(state.range(0));
  const swrm::SyntheticCorpus syn = swrm::make_synthetic_corpus(spec);
  for (auto _ : state) {
    const auto res = swrm::corrupt_sentiment_words(
        syn.split, syn.lexicon, {0.3, swrm::SubstitutionPolicy::kPhoneticTruncate}, 5);
    benchmark::DoNotOptimize(swrm::substitution_error_rate(res.split, syn.lexicon));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CorruptAndAudit)->Arg(500)->Arg(2000);

}  // namespace
