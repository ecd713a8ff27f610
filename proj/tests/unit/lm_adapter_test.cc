#include "swrm/lm_adapter.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "oracles.h"
#include "swrm/errors.h"

namespace swrm {
namespace {

using testing::TempDir;

const std::vector<std::string> kSentence = {"and", "i", "was", "really", "set", "about", "it"};

MockLmConfig basic_config() {
  MockLmConfig c;
  c.dim = 3;
  c.max_k = 4;
  c.embeddings["good"] = RowVector::Unit(3, 0);
  c.embeddings["bad"] = RowVector::Unit(3, 1);
  c.embeddings["play"] = RowVector::Unit(3, 2);
  c.embeddings["##ing"] = RowVector::Constant(3, 1.0);
  c.candidates[candidate_key(kSentence, 4)] = {{"upset", 0.3}, {"set", 0.1}, {"sad", 0.05}};
  return c;
}

TEST(MockLm, ReturnsConfiguredListVerbatim) {
  const MockLm lm(basic_config());
  const CandidateSet set = lm.top_k_candidates(kSentence, 4, 3);
  EXPECT_EQ(set.position, 4u);
  EXPECT_EQ(set.candidates,
            (std::vector<Candidate>{{"upset", 0.3}, {"set", 0.1}, {"sad", 0.05}}));
  EXPECT_EQ(lm.top_k_candidates(kSentence, 4, 1).candidates.size(), 1u);
}

TEST(MockLm, KBeyondListDependsOnCapabilityFlag) {
  MockLmConfig c = basic_config();
  const MockLm strict(c);
  try {
    strict.top_k_candidates(kSentence, 4, 4);
    FAIL();
  } catch (const AdapterError& e) {
    EXPECT_FALSE(e.transient());
  }
  c.truncate_to_vocabulary = true;
  const MockLm lenient(c);
  EXPECT_EQ(lenient.top_k_candidates(kSentence, 4, 4).size(), 3u);
  // Beyond max_k is refused either way.
  EXPECT_THROW(lenient.top_k_candidates(kSentence, 4, 5), AdapterError);
}

TEST(MockLm, BadPositionAndMissingKey) {
  const MockLm lm(basic_config());
  EXPECT_THROW(lm.top_k_candidates(kSentence, 7, 1), std::out_of_range);
  EXPECT_THROW(lm.top_k_candidates(kSentence, 0, 1), AdapterError);
}

TEST(MockLm, HashedFallbackIsDeterministicAndMonotone) {
  MockLmConfig c = basic_config();
  c.fallback = MockLmConfig::Fallback::kHashed;
  const MockLm a(c), b(c);
  const CandidateSet x = a.top_k_candidates(kSentence, 1, 3);
  const CandidateSet y = b.top_k_candidates(kSentence, 1, 3);
  EXPECT_EQ(x.candidates, y.candidates);
  EXPECT_NO_THROW(validate_candidate_set(x));
  for (const auto& cand : x.candidates) EXPECT_NE(cand.token.substr(0, 2), "##");
}

TEST(MockLm, EmbeddingsAreConfiguredAndDeterministic) {
  const MockLm lm(basic_config());
  EXPECT_EQ(lm.embed_token("good"), RowVector::Unit(3, 0));
  EXPECT_EQ(lm.embed_token("Good"), RowVector::Unit(3, 0));
  EXPECT_EQ(lm.embed_token("bad"), lm.embed_token("bad"));
  EXPECT_EQ(lm.dim(), 3);
}

TEST(MockLm, OutOfVocabularyAveragesWordPieces) {
  const MockLm lm(basic_config());
  const RowVector want = (RowVector::Unit(3, 2) + RowVector::Constant(3, 1.0)) / 2.0;
  EXPECT_TRUE(lm.embed_token("playing").isApprox(want));
  EXPECT_EQ(lm.embed_token("zzz"), RowVector::Zero(3));
}

TEST(MockLm, MaskEmbeddingDefaultsToZeros) {
  const MockLm lm(basic_config());
  EXPECT_EQ(lm.mask_embedding(), RowVector::Zero(3));
  EXPECT_EQ(lm.mask_embedding(), lm.mask_embedding());
  EXPECT_EQ(lm.mask_embedding().size(), lm.embed_token("good").size());
}

TEST(MockLm, RejectsInvalidConfig) {
  MockLmConfig c = basic_config();
  c.embeddings["odd"] = RowVector::Zero(2);
  EXPECT_THROW(MockLm{c}, ConfigError);
  c = basic_config();
  c.candidates["x:0"] = {{"a", 0.1}, {"b", 0.2}};
  EXPECT_THROW(MockLm{c}, ConfigError);
}

TEST(MockLmConfig, JsonRoundTrip) {
  MockLmConfig c = basic_config();
  c.mask_embedding = RowVector::Constant(3, 0.25);
  c.fallback = MockLmConfig::Fallback::kHashed;
  c.fallback_vocabulary = {"good", "bad"};
  TempDir dir;
  save_mock_lm_config(dir / "m.json", c);
  const MockLmConfig back = load_mock_lm_config(dir / "m.json");
  EXPECT_EQ(back.dim, c.dim);
  EXPECT_EQ(back.max_k, c.max_k);
  EXPECT_EQ(back.embeddings, c.embeddings);
  EXPECT_EQ(back.candidates, c.candidates);
  EXPECT_EQ(*back.mask_embedding, *c.mask_embedding);
  EXPECT_EQ(back.fallback, c.fallback);
  EXPECT_EQ(back.fallback_vocabulary, c.fallback_vocabulary);
  EXPECT_EQ(mock_lm_config_to_json(back), mock_lm_config_to_json(c));
}

TEST(MockLmConfig, ParseErrors) {
  EXPECT_THROW(parse_mock_lm_config("{"), ConfigError);
  EXPECT_THROW(parse_mock_lm_config(R"({"dim": 2, "embeddings": {"a": [1]}})"), ConfigError);
  EXPECT_THROW(parse_mock_lm_config(R"({"dim": 2, "fallback": "guess"})"), ConfigError);
  EXPECT_THROW(parse_mock_lm_config(R"({"dim": 2, "candidates": {"k:0": [["a"]]}})"),
               ConfigError);
}

TEST(CandidateSet, Validation) {
  CandidateSet s;
  s.candidates = {{"a", 0.5}, {"b", 0.5}, {"c", 0.1}};
  EXPECT_NO_THROW(validate_candidate_set(s));
  s.candidates.push_back({"d", 0.0});
  EXPECT_THROW(validate_candidate_set(s), std::invalid_argument);
  s.candidates.pop_back();
  s.sentiment_count = 4;
  EXPECT_THROW(validate_candidate_set(s), std::invalid_argument);
}

void write_cache(const TempDir& dir, const std::vector<std::string>& vocab, int dim,
                 const std::string& candidates) {
  dir.write("meta.json", R"({"dim": )" + std::to_string(dim) +
                             R"(, "max_k": 2, "mask_token": "[MASK]", "unk_token": "[UNK]", "model": "tiny"})");
  std::string v;
  for (const auto& t : vocab) v += t + "\n";
  dir.write("vocab.txt", v);
  std::ofstream emb(dir / "embeddings.f32", std::ios::binary);
  for (std::size_t r = 0; r < vocab.size(); ++r) {
    for (int c = 0; c < dim; ++c) {
      const float x = static_cast<float>(r) + 0.5f * static_cast<float>(c);
      emb.write(reinterpret_cast<const char*>(&x), sizeof x);
    }
  }
  emb.close();
  dir.write("candidates.jsonl", candidates);
}

TEST(CachedLm, ReadsExportedCache) {
  TempDir dir;
  const std::vector<std::string> sent = {"i", "was", "upset"};
  write_cache(dir, {"[UNK]", "[MASK]", "good", "play", "##ing"}, 2,
              R"({"key": ")" + candidate_key(sent, 2) +
                  R"(", "candidates": [["upset", 0.6], ["sad", 0.2]]})" + "\n");
  const CachedLm lm(dir.path());
  EXPECT_EQ(lm.dim(), 2);
  EXPECT_EQ(lm.max_k(), 2u);
  EXPECT_EQ(lm.describe(), "cached:tiny");
  EXPECT_EQ(lm.embed_token("good"), (RowVector(2) << 2.0, 2.5).finished());
  EXPECT_EQ(lm.mask_embedding(), (RowVector(2) << 1.0, 1.5).finished());
  EXPECT_EQ(lm.embed_token("nothing"), (RowVector(2) << 0.0, 0.5).finished());
  EXPECT_EQ(lm.embed_token("playing"), (RowVector(2) << 3.5, 4.0).finished());
  const CandidateSet set = lm.top_k_candidates(sent, 2, 2);
  EXPECT_EQ(set.candidates.front().token, "upset");
  EXPECT_THROW(lm.top_k_candidates(sent, 1, 2), AdapterError);
  EXPECT_THROW(lm.top_k_candidates(sent, 2, 3), AdapterError);
}

TEST(CachedLm, MissingOrShortFilesFail) {
  TempDir dir;
  EXPECT_THROW(CachedLm(dir / "absent"), AdapterError);
  write_cache(dir, {"a", "b"}, 2, "");
  std::filesystem::resize_file(dir / "embeddings.f32", 4);
  EXPECT_THROW(CachedLm(dir.path()), AdapterError);
}

TEST(EmbedTokens, StacksRows) {
  const MockLm lm(basic_config());
  const std::vector<std::string> toks = {"good", "bad"};
  const Matrix m = embed_tokens(lm, toks);
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(RowVector(m.row(1)), RowVector::Unit(3, 1));
}

}  // namespace
}  // namespace swrm
