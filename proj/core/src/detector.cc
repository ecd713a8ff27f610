#include "swrm/detector.h"

#include <algorithm>
#include <array>
#include <string_view>

#include "swrm/errors.h"

namespace swrm {

CandidateFilter candidate_filter(const CandidateSet& cands, const SentimentLexicon& lexicon) {
  CandidateFilter out;
  out.flags.reserve(cands.candidates.size());
  for (const Candidate& c : cands.candidates) {
    const bool hit = lexicon.contains(c.token);
    out.flags.push_back(hit);
    if (hit) ++out.sentiment_count;
  }
  return out;
}

bool is_skipped_token(const std::string& token) {
  static constexpr std::array<std::string_view, 10> kSpecial = {
      "[CLS]", "[SEP]", "[PAD]", "[MASK]", "[UNK]", "<s>", "</s>", "<pad>", "<unk>", "<mask>"};
  if (std::find(kSpecial.begin(), kSpecial.end(), token) != kSpecial.end()) return true;
  return is_punctuation_only(token);
}

std::size_t argmax_first(std::span<const std::size_t> counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

DetectionResult detect(std::span<const std::string> tokens, const LmAdapter& lm,
                       const SentimentLexicon& lexicon, std::size_t k) {
  if (tokens.empty()) throw std::invalid_argument("detect: empty sentence");
  if (k < 1 || k > lm.max_k()) {
    throw ConfigError("detect: k=" + std::to_string(k) + " outside [1, " +
                      std::to_string(lm.max_k()) + "]");
  }
  DetectionResult result;
  result.k = k;
  result.counts.assign(tokens.size(), 0);
  std::vector<CandidateSet> sets(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    sets[i].position = i;
    if (is_skipped_token(tokens[i])) continue;
    try {
      sets[i] = lm.top_k_candidates(tokens, i, k);
    } catch (const AdapterError& e) {
      throw AdapterError(e.kind(), "position " + std::to_string(i) + ": " + e.what());
    }
    const CandidateFilter f = candidate_filter(sets[i], lexicon);
    sets[i].sentiment_count = f.sentiment_count;
    result.counts[i] = f.sentiment_count;
  }
  result.position = argmax_first(result.counts);
  result.gate_mask = gate_from_count(result.counts[result.position], k);
  result.candidate_set = std::move(sets[result.position]);
  return result;
}

}  // namespace swrm
