#ifndef SWRM_CORPUS_H_
#define SWRM_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swrm/autograd.h"
#include "swrm/lexicon.h"

namespace swrm {

using TokenSequence = std::vector<std::string>;

// One tri-modal sample. Feature matrices hold one frame per row.
struct Utterance {
  std::string id;
  TokenSequence tokens;
  Matrix acoustic;
  Matrix visual;
  double label = 0.0;
  // Reference transcript; present for corruption audits only.
  std::optional<TokenSequence> gold_tokens;
};

enum class SplitName { kTrain, kValid, kTest };

std::string_view to_string(SplitName name);
SplitName parse_split_name(std::string_view text);

struct DatasetSplit {
  SplitName name = SplitName::kTrain;
  std::vector<Utterance> utterances;

  bool empty() const { return utterances.empty(); }
  std::size_t size() const { return utterances.size(); }
};

inline constexpr double kMinLabel = -3.0;
inline constexpr double kMaxLabel = 3.0;

// Throws SchemaError when an utterance breaks a data invariant.
void validate_utterance(const Utterance& u);
// Per-utterance checks plus unique ids and constant feature widths.
void validate_split(const DatasetSplit& split);

// JSON Lines, one utterance per line:
//   {"id": str, "tokens": [str], "acoustic": [[float]], "visual": [[float]],
//    "label": float, "gold_tokens": [str] | null}
// Malformed lines raise LoadError (with the 1-based line number); invariant
// violations raise SchemaError. Blank lines are skipped.
DatasetSplit read_dataset(std::istream& in, SplitName name);
DatasetSplit load_dataset(const std::filesystem::path& path, SplitName name);
void write_dataset(std::ostream& out, const DatasetSplit& split);
void save_dataset(const std::filesystem::path& path, const DatasetSplit& split);

// Maps n frames onto target_len token slots. Row t is the mean of a
// contiguous group of floor(n / target_len) frames; the n mod target_len
// leftover frames join the final group. With n < target_len, frames are first
// upsampled by nearest neighbour (slot j takes frame floor(j * n / target_len)).
Matrix pseudo_align(const Matrix& features, Eigen::Index target_len);

enum class SubstitutionPolicy { kPhoneticTruncate, kRandomVocab };

std::string_view to_string(SubstitutionPolicy policy);
SubstitutionPolicy parse_substitution_policy(std::string_view text);

struct CorruptionSpec {
  double rate = 0.0;
  SubstitutionPolicy policy = SubstitutionPolicy::kPhoneticTruncate;
};

struct CorruptionRecord {
  std::string id;
  std::size_t position = 0;
  std::string original;
  std::string replacement;

  friend bool operator==(const CorruptionRecord&, const CorruptionRecord&) = default;
};

struct CorruptionResult {
  DatasetSplit split;
  std::vector<CorruptionRecord> log;
};

// Drops the leading syllable-like cluster of a word ("upset" -> "set"):
// the leading consonant run, the following vowel run and one more consonant.
// Returns an empty string when nothing of length >= 2 would remain.
std::string phonetic_truncate(std::string_view word);

// Replaces exactly one lexicon word in round(rate * eligible) of the
// utterances that contain at least one lexicon word. Replacements are never
// lexicon members. Every output utterance gets gold_tokens (kept if already
// present, otherwise the input tokens). Labels and features are untouched.
// Deterministic given `seed`.
CorruptionResult corrupt_sentiment_words(const DatasetSplit& split,
                                         const SentimentLexicon& lexicon,
                                         const CorruptionSpec& spec,
                                         std::uint64_t seed);

// JSON Lines {"id": str, "position": int, "original": str, "replacement": str}.
void save_corruption_log(const std::filesystem::path& path,
                         std::span<const CorruptionRecord> log);
std::vector<CorruptionRecord> load_corruption_log(const std::filesystem::path& path);

// One column of a word alignment; an absent side is an insertion/deletion.
struct AlignedPair {
  std::optional<std::size_t> gold;
  std::optional<std::size_t> hyp;
};

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t matches = 0;

  std::size_t errors() const { return substitutions + deletions + insertions; }
};

// Unit-cost Levenshtein alignment over words. On ties the backtrace prefers
// a substitution (or match) over an insertion/deletion pair.
std::vector<AlignedPair> align_words(std::span<const std::string> gold,
                                     std::span<const std::string> hyp);
EditCounts count_edits(std::span<const std::string> gold,
                       std::span<const std::string> hyp);

// (S + D + I) / len(gold). Throws std::invalid_argument for empty gold.
double wer(std::span<const std::string> gold, std::span<const std::string> hyp);

// True when a lexicon word in `gold` is aligned to a different token in `hyp`
// that is either not a lexicon word or carries the other polarity.
bool has_sentiment_substitution(std::span<const std::string> gold,
                                std::span<const std::string> hyp,
                                const SentimentLexicon& lexicon);

// Per-utterance has_sentiment_substitution flags. Throws AuditError when an
// utterance lacks gold_tokens.
std::vector<bool> substitution_error_flags(const DatasetSplit& split,
                                           const SentimentLexicon& lexicon);

// Fraction of utterances with a sentiment-word substitution error.
double substitution_error_rate(const DatasetSplit& split,
                               const SentimentLexicon& lexicon);

}  // namespace swrm

#endif  // SWRM_CORPUS_H_
