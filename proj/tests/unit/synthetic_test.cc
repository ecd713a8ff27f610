#include "swrm/synthetic.h"

#include <gtest/gtest.h>

#include "swrm/detector.h"

namespace swrm {
namespace {

TEST(Synthetic, ShapesFollowSpec) {
  SyntheticSpec spec;
  spec.utterances = 40;
  const SyntheticCorpus c = make_synthetic_corpus(spec);
  ASSERT_EQ(c.split.size(), 40u);
  for (const Utterance& u : c.split.utterances) {
    EXPECT_GE(u.tokens.size(), spec.min_tokens);
    EXPECT_LE(u.tokens.size(), spec.max_tokens);
    EXPECT_GE(static_cast<std::size_t>(u.visual.rows()), spec.min_frames);
    EXPECT_LE(static_cast<std::size_t>(u.visual.rows()), spec.max_frames);
    EXPECT_EQ(u.visual.cols(), spec.visual_dim);
    EXPECT_EQ(u.acoustic.cols(), spec.acoustic_dim);
    EXPECT_GE(u.label, -3.0);
    EXPECT_LE(u.label, 3.0);
    EXPECT_EQ(u.id.rfind(spec.id_prefix, 0), 0u);
  }
  EXPECT_EQ(c.lm.dim, spec.embedding_dim);
  EXPECT_EQ(c.lm.max_k, spec.table_size);
}

TEST(Synthetic, Reproducible) {
  SyntheticSpec spec;
  const SyntheticCorpus a = make_synthetic_corpus(spec), b = make_synthetic_corpus(spec);
  ASSERT_EQ(a.split.size(), b.split.size());
  for (std::size_t i = 0; i < a.split.size(); ++i) {
    EXPECT_EQ(a.split.utterances[i].tokens, b.split.utterances[i].tokens);
    EXPECT_EQ(a.split.utterances[i].visual, b.split.utterances[i].visual);
    EXPECT_EQ(a.split.utterances[i].label, b.split.utterances[i].label);
  }
  spec.seed = 2;
  const SyntheticCorpus c = make_synthetic_corpus(spec);
  bool differs = false;
  for (std::size_t i = 0; i < a.split.size(); ++i) {
    differs |= a.split.utterances[i].tokens != c.split.utterances[i].tokens;
  }
  EXPECT_TRUE(differs);
}

TEST(Synthetic, DetectorFindsSentimentWord) {
  SyntheticSpec spec;
  spec.utterances = 30;
  spec.sentiment_fraction = 1.0;
  const SyntheticCorpus c = make_synthetic_corpus(spec);
  const MockLm lm(c.lm);
  std::size_t open = 0;
  for (const Utterance& u : c.split.utterances) {
    const DetectionResult d = detect(u.tokens, lm, c.lexicon, 10);
    open += static_cast<std::size_t>(d.gate_mask);
    if (d.gate_mask) EXPECT_TRUE(c.lexicon.contains(u.tokens[d.position]));
  }
  EXPECT_EQ(open, c.split.size());
}

TEST(Synthetic, WordListsAreDisjoint) {
  for (auto p : synthetic_positive_words()) {
    for (auto n : synthetic_negative_words()) EXPECT_NE(p, n);
    for (auto n : synthetic_neutral_words()) EXPECT_NE(p, n);
  }
}

}  // namespace
}  // namespace swrm
