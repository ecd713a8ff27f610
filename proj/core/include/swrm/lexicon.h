#ifndef SWRM_LEXICON_H_
#define SWRM_LEXICON_H_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace swrm {

enum class Polarity { kPositive, kNegative };

std::string_view to_string(Polarity p);
// Accepts positive/pos/+/+1/1 and negative/neg/-/-1 (case-insensitive).
std::optional<Polarity> parse_polarity(std::string_view text);

// Lower-cases ASCII and strips leading/trailing punctuation.
std::string normalize_word(std::string_view word);

// True for tokens made only of punctuation (and for the empty string).
bool is_punctuation_only(std::string_view token);

// Word-piece continuation pieces such as "##ing".
bool is_subword_piece(std::string_view token);

// Word -> polarity map. Keys are normalized (see normalize_word).
class SentimentLexicon {
 public:
  SentimentLexicon() = default;

  // Normalizes keys; later duplicates overwrite earlier ones.
  static SentimentLexicon from_entries(
      const std::vector<std::pair<std::string, Polarity>>& entries);

  // Case-insensitive lookup after punctuation stripping. Word pieces are
  // never members.
  std::optional<Polarity> polarity_of(std::string_view word) const;
  bool contains(std::string_view word) const { return polarity_of(word).has_value(); }

  void insert(std::string_view word, Polarity p);
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, Polarity, std::less<>>& entries() const { return entries_; }

  friend bool operator==(const SentimentLexicon&, const SentimentLexicon&) = default;

 private:
  std::map<std::string, Polarity, std::less<>> entries_;
};

struct LexiconConflict {
  std::string word;
  Polarity previous;
  Polarity replacement;
  std::filesystem::path file;
};

// Loads and merges lexicon files in order. Each non-comment line is either
// "word" or "word<TAB>polarity"; lines starting with ';' or '#' are comments.
// A bare word takes its polarity from the file name ("neg" or "pos" in the
// stem). On conflict the later file wins and a warning is logged; conflicts
// are also reported through `conflicts` when non-null. Throws LexiconError
// if the merged lexicon is empty or a polarity cannot be determined.
SentimentLexicon load_lexicon(std::span<const std::filesystem::path> paths,
                              std::vector<LexiconConflict>* conflicts = nullptr);

// Writes "word<TAB>polarity" lines in key order; load_lexicon reads them back.
void save_lexicon(const std::filesystem::path& path, const SentimentLexicon& lexicon);

inline std::optional<Polarity> polarity_of(const SentimentLexicon& lexicon,
                                           std::string_view word) {
  return lexicon.polarity_of(word);
}

}  // namespace swrm

#endif  // SWRM_LEXICON_H_
