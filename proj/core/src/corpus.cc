#include "swrm/corpus.h"

#include <glog/logging.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "swrm/errors.h"

namespace swrm {

using nlohmann::json;

std::string_view to_string(SplitName name) {
  switch (name) {
    case SplitName::kTrain: return "train";
    case SplitName::kValid: return "valid";
    case SplitName::kTest: return "test";
  }
  return "train";
}

SplitName parse_split_name(std::string_view text) {
  if (text == "train") return SplitName::kTrain;
  if (text == "valid") return SplitName::kValid;
  if (text == "test") return SplitName::kTest;
  throw ConfigError("unknown split name '" + std::string(text) + "'");
}

void validate_utterance(const Utterance& u) {
  const std::string where = "utterance '" + u.id + "': ";
  if (u.id.empty()) throw SchemaError("utterance with empty id");
  if (u.tokens.empty()) throw SchemaError(where + "no tokens");
  if (u.acoustic.rows() < 1 || u.acoustic.cols() < 1) {
    throw SchemaError(where + "acoustic modality is empty");
  }
  if (u.visual.rows() < 1 || u.visual.cols() < 1) {
    throw SchemaError(where + "visual modality is empty");
  }
  if (!std::isfinite(u.label) || u.label < kMinLabel || u.label > kMaxLabel) {
    throw SchemaError(where + "label " + std::to_string(u.label) + " outside [-3, 3]");
  }
  if (!u.acoustic.allFinite()) throw SchemaError(where + "non-finite acoustic feature");
  if (!u.visual.allFinite()) throw SchemaError(where + "non-finite visual feature");
  if (u.gold_tokens && u.gold_tokens->empty()) {
    throw SchemaError(where + "gold_tokens present but empty");
  }
}

void validate_split(const DatasetSplit& split) {
  std::unordered_set<std::string> ids;
  Eigen::Index d_a = -1, d_v = -1;
  for (const Utterance& u : split.utterances) {
    validate_utterance(u);
    if (!ids.insert(u.id).second) throw SchemaError("duplicate id '" + u.id + "'");
    if (d_a < 0) {
      d_a = u.acoustic.cols();
      d_v = u.visual.cols();
    } else if (u.acoustic.cols() != d_a || u.visual.cols() != d_v) {
      throw SchemaError("utterance '" + u.id + "': feature width differs from earlier records");
    }
  }
}

namespace {

Matrix parse_matrix(const json& j, const char* field, std::size_t line) {
  if (!j.is_array()) throw LoadError(line, std::string(field) + " must be an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const std::size_t cols = j.front().is_array() ? j.front().size() : 0;
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const json& row = j[r];
    if (!row.is_array()) throw LoadError(line, std::string(field) + " row is not an array");
    if (row.size() != cols) {
      throw SchemaError("line " + std::to_string(line) + ": ragged " + field + " matrix");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!row[c].is_number()) {
        throw SchemaError("line " + std::to_string(line) + ": non-numeric " + field + " entry");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
  }
  return m;
}

TokenSequence parse_tokens(const json& j, const char* field, std::size_t line) {
  if (!j.is_array()) throw LoadError(line, std::string(field) + " must be an array of strings");
  TokenSequence out;
  out.reserve(j.size());
  for (const json& t : j) {
    if (!t.is_string()) throw LoadError(line, std::string(field) + " entries must be strings");
    out.push_back(t.get<std::string>());
  }
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

DatasetSplit read_dataset(std::istream& in, SplitName name) {
  DatasetSplit split;
  split.name = name;
  std::string text;
  std::size_t line = 0;
  Eigen::Index d_a = -1, d_v = -1;
  std::unordered_set<std::string> ids;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(),
                    [](char c) { return std::isspace(static_cast<unsigned char>(c)); })) {
      continue;
    }
    json rec;
    try {
      rec = json::parse(text);
    } catch (const json::parse_error& e) {
      throw LoadError(line, std::string("malformed JSON: ") + e.what());
    }
    if (!rec.is_object()) throw LoadError(line, "record is not a JSON object");
    for (const char* key : {"id", "tokens", "acoustic", "visual", "label"}) {
      if (!rec.contains(key)) throw LoadError(line, std::string("missing field '") + key + "'");
    }
    if (!rec["id"].is_string()) throw LoadError(line, "id must be a string");
    if (!rec["label"].is_number()) throw LoadError(line, "label must be a number");

    Utterance u;
    u.id = rec["id"].get<std::string>();
    u.tokens = parse_tokens(rec["tokens"], "tokens", line);
    u.acoustic = parse_matrix(rec["acoustic"], "acoustic", line);
    u.visual = parse_matrix(rec["visual"], "visual", line);
    u.label = rec["label"].get<double>();
    if (rec.contains("gold_tokens") && !rec["gold_tokens"].is_null()) {
      u.gold_tokens = parse_tokens(rec["gold_tokens"], "gold_tokens", line);
    }
    try {
      validate_utterance(u);
    } catch (const SchemaError& e) {
      throw SchemaError("line " + std::to_string(line) + ": " + e.what());
    }
    if (!ids.insert(u.id).second) {
      throw SchemaError("line " + std::to_string(line) + ": duplicate id '" + u.id + "'");
    }
    if (d_a < 0) {
      d_a = u.acoustic.cols();
      d_v = u.visual.cols();
    } else if (u.acoustic.cols() != d_a || u.visual.cols() != d_v) {
      throw SchemaError("line " + std::to_string(line) +
                        ": feature dimension mismatch with earlier records (acoustic " +
                        std::to_string(u.acoustic.cols()) + " vs " + std::to_string(d_a) +
                        ", visual " + std::to_string(u.visual.cols()) + " vs " +
                        std::to_string(d_v) + ")");
    }
    split.utterances.push_back(std::move(u));
  }
  return split;
}

DatasetSplit load_dataset(const std::filesystem::path& path, SplitName name) {
  std::ifstream in(path);
  if (!in) throw LoadError(0, "cannot open dataset " + path.string());
  return read_dataset(in, name);
}

void write_dataset(std::ostream& out, const DatasetSplit& split) {
  for (const Utterance& u : split.utterances) {
    json rec;
    rec["id"] = u.id;
    rec["tokens"] = u.tokens;
    rec["acoustic"] = matrix_to_json(u.acoustic);
    rec["visual"] = matrix_to_json(u.visual);
    rec["label"] = u.label;
    rec["gold_tokens"] = u.gold_tokens ? json(*u.gold_tokens) : json(nullptr);
    out << rec.dump() << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const DatasetSplit& split) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset " + path.string());
  write_dataset(out, split);
}

Matrix pseudo_align(const Matrix& features, Eigen::Index target_len) {
  if (features.rows() < 1 || target_len < 1) {
    throw std::invalid_argument("pseudo_align: need at least one frame and one slot");
  }
  const Eigen::Index n = features.rows();
  const Eigen::Index d = features.cols();
  if (n < target_len) {
    Matrix out(target_len, d);
    for (Eigen::Index j = 0; j < target_len; ++j) out.row(j) = features.row(j * n / target_len);
    return out;
  }
  const Eigen::Index base = n / target_len;
  Matrix out(target_len, d);
  for (Eigen::Index t = 0; t < target_len; ++t) {
    const Eigen::Index start = t * base;
    const Eigen::Index count = (t == target_len - 1) ? n - start : base;
    // Plain frame-order accumulation keeps results reproducible bit for bit.
    RowVector acc = RowVector::Zero(d);
    for (Eigen::Index r = start; r < start + count; ++r) acc += features.row(r);
    out.row(t) = acc / static_cast<double>(count);
  }
  return out;
}

std::string_view to_string(SubstitutionPolicy policy) {
  return policy == SubstitutionPolicy::kPhoneticTruncate ? "phonetic-truncate" : "random-vocab";
}

SubstitutionPolicy parse_substitution_policy(std::string_view text) {
  if (text == "phonetic-truncate") return SubstitutionPolicy::kPhoneticTruncate;
  if (text == "random-vocab") return SubstitutionPolicy::kRandomVocab;
  throw ConfigError("unknown substitution policy '" + std::string(text) + "'");
}

namespace {

bool is_vowel(char c) {
  switch (std::tolower(static_cast<unsigned char>(c))) {
    case 'a': case 'e': case 'i': case 'o': case 'u': case 'y':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::string phonetic_truncate(std::string_view word) {
  std::size_t i = 0;
  while (i < word.size() && !is_vowel(word[i])) ++i;
  while (i < word.size() && is_vowel(word[i])) ++i;
  if (i < word.size()) ++i;
  if (word.size() - i < 2) return {};
  return std::string(word.substr(i));
}

namespace {

bool acceptable_replacement(const std::string& candidate, const std::string& original,
                            const SentimentLexicon& lexicon) {
  return !candidate.empty() && candidate != original && !lexicon.contains(candidate) &&
         !is_punctuation_only(candidate);
}

std::string random_vocab_replacement(const std::vector<std::string>& pool,
                                     const std::string& original, std::mt19937_64& rng) {
  std::vector<const std::string*> choices;
  for (const auto& w : pool) {
    if (w != original) choices.push_back(&w);
  }
  if (choices.empty()) return "uh";
  std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
  return *choices[pick(rng)];
}

}  // namespace

CorruptionResult corrupt_sentiment_words(const DatasetSplit& split,
                                         const SentimentLexicon& lexicon,
                                         const CorruptionSpec& spec, std::uint64_t seed) {
  if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) {
    throw ConfigError("corruption rate must lie in [0, 1]");
  }
  CorruptionResult result;
  result.split = split;
  for (Utterance& u : result.split.utterances) {
    if (!u.gold_tokens) u.gold_tokens = u.tokens;
  }

  // Non-lexicon vocabulary of the split, sorted so draws are reproducible.
  std::set<std::string> vocab;
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < split.utterances.size(); ++i) {
    bool has_lexicon_word = false;
    for (const auto& t : split.utterances[i].tokens) {
      if (lexicon.contains(t)) {
        has_lexicon_word = true;
      } else if (!is_punctuation_only(t)) {
        vocab.insert(normalize_word(t));
      }
    }
    if (has_lexicon_word) eligible.push_back(i);
  }
  const std::vector<std::string> pool(vocab.begin(), vocab.end());

  std::mt19937_64 rng(seed);
  const auto target = static_cast<std::size_t>(
      std::llround(spec.rate * static_cast<double>(eligible.size())));
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(target);
  std::sort(eligible.begin(), eligible.end());

  for (std::size_t idx : eligible) {
    Utterance& u = result.split.utterances[idx];
    std::vector<std::size_t> positions;
    for (std::size_t p = 0; p < u.tokens.size(); ++p) {
      if (lexicon.contains(u.tokens[p])) positions.push_back(p);
    }
    std::uniform_int_distribution<std::size_t> pick(0, positions.size() - 1);
    const std::size_t pos = positions[pick(rng)];
    const std::string original = u.tokens[pos];

    std::string replacement;
    if (spec.policy == SubstitutionPolicy::kPhoneticTruncate) {
      replacement = phonetic_truncate(original);
      if (!acceptable_replacement(replacement, original, lexicon) && original.size() > 2) {
        replacement = original.substr(1);
      }
    }
    if (!acceptable_replacement(replacement, original, lexicon)) {
      replacement = random_vocab_replacement(pool, normalize_word(original), rng);
    }
    u.tokens[pos] = replacement;
    result.log.push_back({u.id, pos, original, replacement});
  }
  return result;
}

void save_corruption_log(const std::filesystem::path& path,
                         std::span<const CorruptionRecord> log) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write corruption log " + path.string());
  for (const auto& r : log) {
    json rec;
    rec["id"] = r.id;
    rec["position"] = r.position;
    rec["original"] = r.original;
    rec["replacement"] = r.replacement;
    out << rec.dump() << '\n';
  }
}

std::vector<CorruptionRecord> load_corruption_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(0, "cannot open corruption log " + path.string());
  std::vector<CorruptionRecord> log;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    try {
      const json rec = json::parse(text);
      log.push_back({rec.at("id").get<std::string>(), rec.at("position").get<std::size_t>(),
                     rec.at("original").get<std::string>(),
                     rec.at("replacement").get<std::string>()});
    } catch (const json::exception& e) {
      throw LoadError(line, std::string("bad corruption record: ") + e.what());
    }
  }
  return log;
}

std::vector<AlignedPair> align_words(std::span<const std::string> gold,
                                     std::span<const std::string> hyp) {
  const std::size_t n = gold.size(), m = hyp.size();
  std::vector<std::vector<std::size_t>> dp(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) dp[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) dp[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = dp[i - 1][j - 1] + (gold[i - 1] == hyp[j - 1] ? 0 : 1);
      dp[i][j] = std::min({diag, dp[i - 1][j] + 1, dp[i][j - 1] + 1});
    }
  }
  std::vector<AlignedPair> path;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        dp[i][j] == dp[i - 1][j - 1] + (gold[i - 1] == hyp[j - 1] ? 0 : 1)) {
      path.push_back({i - 1, j - 1});
      --i;
      --j;
    } else if (i > 0 && dp[i][j] == dp[i - 1][j] + 1) {
      path.push_back({i - 1, std::nullopt});
      --i;
    } else {
      path.push_back({std::nullopt, j - 1});
      --j;
    }
  }
  std::reverse(path.begin(), path.end());
  return path;
}

EditCounts count_edits(std::span<const std::string> gold, std::span<const std::string> hyp) {
  EditCounts c;
  for (const AlignedPair& p : align_words(gold, hyp)) {
    if (p.gold && p.hyp) {
      if (gold[*p.gold] == hyp[*p.hyp]) {
        ++c.matches;
      } else {
        ++c.substitutions;
      }
    } else if (p.gold) {
      ++c.deletions;
    } else {
      ++c.insertions;
    }
  }
  return c;
}

double wer(std::span<const std::string> gold, std::span<const std::string> hyp) {
  if (gold.empty()) throw std::invalid_argument("wer: empty reference has no denominator");
  return static_cast<double>(count_edits(gold, hyp).errors()) /
         static_cast<double>(gold.size());
}

bool has_sentiment_substitution(std::span<const std::string> gold,
                                std::span<const std::string> hyp,
                                const SentimentLexicon& lexicon) {
  for (const AlignedPair& p : align_words(gold, hyp)) {
    if (!p.gold || !p.hyp) continue;
    const std::string& g = gold[*p.gold];
    const std::string& h = hyp[*p.hyp];
    if (g == h) continue;
    const auto gp = lexicon.polarity_of(g);
    if (!gp) continue;
    const auto hp = lexicon.polarity_of(h);
    if (!hp || *hp != *gp) return true;
  }
  return false;
}

std::vector<bool> substitution_error_flags(const DatasetSplit& split,
                                           const SentimentLexicon& lexicon) {
  std::vector<bool> flags;
  flags.reserve(split.size());
  for (const Utterance& u : split.utterances) {
    if (!u.gold_tokens) throw AuditError("utterance '" + u.id + "' has no gold_tokens");
    flags.push_back(has_sentiment_substitution(*u.gold_tokens, u.tokens, lexicon));
  }
  return flags;
}

double substitution_error_rate(const DatasetSplit& split, const SentimentLexicon& lexicon) {
  if (split.empty()) throw AuditError("cannot audit an empty split");
  const std::vector<bool> flags = substitution_error_flags(split, lexicon);
  const auto hits = std::count(flags.begin(), flags.end(), true);
  return static_cast<double>(hits) / static_cast<double>(flags.size());
}

}  // namespace swrm
