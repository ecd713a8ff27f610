#ifndef SWRM_TESTS_SUPPORT_TINY_PIPELINE_H_
#define SWRM_TESTS_SUPPORT_TINY_PIPELINE_H_

// Small synthetic corpus plus a matching model config, shared by the model,
// trainer and checkpoint tests.

#include <memory>
#include <vector>

#include "swrm/model.h"
#include "swrm/synthetic.h"

namespace swrm::testing {

inline ModelConfig tiny_model_config(const SyntheticSpec& spec) {
  ModelConfig c;
  c.d_x = spec.embedding_dim;
  c.visual_dim = spec.visual_dim;
  c.acoustic_dim = spec.acoustic_dim;
  c.ffn_dim = 16;
  c.d_h_v = 4;
  c.d_h_a = 4;
  c.d_h_va = 6;
  c.d_v_l = 6;
  c.d_v_v = 4;
  c.d_v_a = 4;
  c.d_v_f = 8;
  c.k = 10;
  return c;
}

struct TinyPipeline {
  SyntheticSpec spec;
  SyntheticCorpus corpus;
  std::unique_ptr<MockLm> lm;
  ModelConfig config;
  std::vector<PreparedSample> samples;

  explicit TinyPipeline(std::size_t utterances = 12, std::uint64_t seed = 3) {
    spec.utterances = utterances;
    spec.embedding_dim = 8;
    spec.seed = seed;
    corpus = make_synthetic_corpus(spec);
    lm = std::make_unique<MockLm>(corpus.lm);
    config = tiny_model_config(spec);
    samples = prepare_split(corpus.split, *lm, corpus.lexicon, config);
  }
};

}  // namespace swrm::testing

#endif  // SWRM_TESTS_SUPPORT_TINY_PIPELINE_H_
