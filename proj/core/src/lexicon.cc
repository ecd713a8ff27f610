#include "swrm/lexicon.h"

#include <glog/logging.h>

#include <algorithm>
#include <cctype>
#include <fstream>

#include "swrm/errors.h"

namespace swrm {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<Polarity> polarity_from_filename(const std::filesystem::path& path) {
  const std::string stem = lower(path.stem().string());
  if (stem.find("neg") != std::string::npos) return Polarity::kNegative;
  if (stem.find("pos") != std::string::npos) return Polarity::kPositive;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Polarity p) {
  return p == Polarity::kPositive ? "positive" : "negative";
}

std::optional<Polarity> parse_polarity(std::string_view text) {
  const std::string t = lower(trim(text));
  if (t == "positive" || t == "pos" || t == "+" || t == "+1" || t == "1") {
    return Polarity::kPositive;
  }
  if (t == "negative" || t == "neg" || t == "-" || t == "-1") {
    return Polarity::kNegative;
  }
  return std::nullopt;
}

std::string normalize_word(std::string_view word) {
  auto is_punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0; };
  while (!word.empty() && is_punct(word.front())) word.remove_prefix(1);
  while (!word.empty() && is_punct(word.back())) word.remove_suffix(1);
  return lower(word);
}

bool is_punctuation_only(std::string_view token) {
  return std::all_of(token.begin(), token.end(), [](char c) {
    return std::ispunct(static_cast<unsigned char>(c)) != 0;
  });
}

bool is_subword_piece(std::string_view token) {
  return token.size() > 2 && token.substr(0, 2) == "##";
}

SentimentLexicon SentimentLexicon::from_entries(
    const std::vector<std::pair<std::string, Polarity>>& entries) {
  SentimentLexicon lex;
  for (const auto& [word, pol] : entries) lex.insert(word, pol);
  return lex;
}

void SentimentLexicon::insert(std::string_view word, Polarity p) {
  std::string key = normalize_word(word);
  if (key.empty()) return;
  entries_[std::move(key)] = p;
}

std::optional<Polarity> SentimentLexicon::polarity_of(std::string_view word) const {
  if (is_subword_piece(word)) return std::nullopt;
  const std::string key = normalize_word(word);
  if (key.empty()) return std::nullopt;
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

SentimentLexicon load_lexicon(std::span<const std::filesystem::path> paths,
                              std::vector<LexiconConflict>* conflicts) {
  SentimentLexicon lex;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw LexiconError("cannot open lexicon file " + path.string());
    const std::optional<Polarity> file_polarity = polarity_from_filename(path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view view = trim(line);
      if (view.empty() || view.front() == ';' || view.front() == '#') continue;

      std::string_view word = view;
      std::optional<Polarity> pol = file_polarity;
      if (auto tab = view.find('\t'); tab != std::string_view::npos) {
        word = trim(view.substr(0, tab));
        pol = parse_polarity(view.substr(tab + 1));
        if (!pol) {
          throw LexiconError(path.string() + ":" + std::to_string(lineno) +
                             ": unknown polarity '" +
                             std::string(trim(view.substr(tab + 1))) + "'");
        }
      }
      if (!pol) {
        throw LexiconError(path.string() + ":" + std::to_string(lineno) +
                           ": no polarity column and none implied by file name");
      }
      const std::string key = normalize_word(word);
      if (key.empty()) continue;
      if (auto prev = lex.polarity_of(key); prev && *prev != *pol) {
        LOG(WARNING) << "lexicon conflict for '" << key << "': "
                     << to_string(*prev) << " replaced by " << to_string(*pol)
                     << " from " << path.string();
        if (conflicts != nullptr) conflicts->push_back({key, *prev, *pol, path});
      }
      lex.insert(key, *pol);
    }
  }
  if (lex.empty()) throw LexiconError("lexicon has no entries");
  return lex;
}

void save_lexicon(const std::filesystem::path& path, const SentimentLexicon& lexicon) {
  std::ofstream out(path);
  if (!out) throw LexiconError("cannot write lexicon " + path.string());
  for (const auto& [word, polarity] : lexicon.entries()) {
    out << word << '\t' << to_string(polarity) << '\n';
  }
  if (!out) throw LexiconError("failed writing lexicon " + path.string());
}

}  // namespace swrm
