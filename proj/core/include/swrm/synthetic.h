#ifndef SWRM_SYNTHETIC_H_
#define SWRM_SYNTHETIC_H_

// Reproducible toy corpora with a matching lexicon and mock LM, for tests,
// benchmarks and the `synth` command.

#include <cstdint>
#include <span>
#include <string>

#include "swrm/corpus.h"
#include "swrm/lexicon.h"
#include "swrm/lm_adapter.h"

namespace swrm {

struct SyntheticSpec {
  std::size_t utterances = 32;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 9;
  // Frame counts are drawn from [min_frames, max_frames]; values below
  // min_tokens exercise upsampling in pseudo-alignment.
  std::size_t min_frames = 3;
  std::size_t max_frames = 16;
  Eigen::Index embedding_dim = 16;
  Eigen::Index visual_dim = 6;
  Eigen::Index acoustic_dim = 5;
  // Fraction of utterances that contain one sentiment word.
  double sentiment_fraction = 0.8;
  // Length of every candidate list stored for a sentiment position; also the
  // mock's max_k.
  std::size_t table_size = 20;
  std::string id_prefix = "syn";
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  DatasetSplit split;
  SentimentLexicon lexicon;
  MockLmConfig lm;
};

// Labels follow the polarity of the sentiment word (neutral utterances stay
// near 0) and the visual/acoustic frames carry a noisy copy of the label.
// The mock LM proposes mostly same-polarity sentiment words at the
// sentiment position and neutral words everywhere else, so detection finds
// that position with p = 1 even after the word is corrupted.
SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec);

std::span<const std::string_view> synthetic_positive_words();
std::span<const std::string_view> synthetic_negative_words();
std::span<const std::string_view> synthetic_neutral_words();

}  // namespace swrm

#endif  // SWRM_SYNTHETIC_H_
