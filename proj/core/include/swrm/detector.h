#ifndef SWRM_DETECTOR_H_
#define SWRM_DETECTOR_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "swrm/lexicon.h"
#include "swrm/lm_adapter.h"

namespace swrm {

// Most probable sentiment-word position of a sentence.
struct DetectionResult {
  std::size_t position = 0;
  // 1 when counts[position] > k / 2, else 0.
  int gate_mask = 0;
  CandidateSet candidate_set;
  std::vector<std::size_t> counts;
  std::size_t k = 0;
};

struct CandidateFilter {
  std::size_t sentiment_count = 0;
  std::vector<bool> flags;
};

// flags[t] is set iff candidate t is a lexicon word.
CandidateFilter candidate_filter(const CandidateSet& cands, const SentimentLexicon& lexicon);

// Special tokens ([CLS], [SEP], [PAD], [MASK], [UNK], <s>, </s>, <pad>,
// <unk>, <mask>) and punctuation-only tokens are never masked.
bool is_skipped_token(const std::string& token);

// Index of the first maximum; 0 for an empty sequence.
std::size_t argmax_first(std::span<const std::size_t> counts);

// Strict threshold: count > k / 2.
inline int gate_from_count(std::size_t count, std::size_t k) { return 2 * count > k ? 1 : 0; }

// Masks each position in turn, counts lexicon words among the k candidates
// and picks the position with the largest count (smallest index on ties).
// Skipped tokens get a count of 0 and are not sent to the LM. Throws
// ConfigError for k outside [1, lm.max_k()] and rethrows AdapterError with
// the failing position in the message.
DetectionResult detect(std::span<const std::string> tokens, const LmAdapter& lm,
                       const SentimentLexicon& lexicon, std::size_t k);

}  // namespace swrm

#endif  // SWRM_DETECTOR_H_
