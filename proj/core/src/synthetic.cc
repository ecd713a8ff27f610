#include "swrm/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <random>

#include "swrm/errors.h"
#include "swrm/hashing.h"

namespace swrm {
namespace {

constexpr std::array<std::string_view, 30> kPositive = {
    "good",     "great",    "happy",     "love",      "awesome",    "cool",
    "nice",     "excellent", "wonderful", "amazing",  "fantastic",  "enjoy",
    "best",     "beautiful", "fun",       "brilliant", "pleasant",  "perfect",
    "superb",   "glad",     "funny",     "lovely",    "delightful", "impressive",
    "charming", "exciting", "fine",      "favorite",  "sweet",      "remarkable"};

constexpr std::array<std::string_view, 30> kNegative = {
    "bad",      "upset",      "terrible", "awful",    "hate",     "boring",
    "sad",      "worst",      "horrible", "poor",     "annoying", "angry",
    "disappointing", "dull",  "ugly",     "stupid",   "weak",     "painful",
    "nasty",    "lousy",      "mediocre", "tedious",  "dreadful", "bland",
    "unhappy",  "messy",      "pathetic", "wrong",    "confusing", "gross"};

constexpr std::array<std::string_view, 40> kNeutral = {
    "i",     "was",     "really", "about",   "it",        "the",   "movie", "and",
    "this",  "that",    "film",   "actor",   "story",     "scene", "just",  "very",
    "so",    "think",   "felt",   "watched", "plot",      "we",    "they",  "is",
    "a",     "of",      "to",     "with",    "show",      "character", "ending", "music",
    "part",  "time",    "kind",   "thing",   "there",     "some",  "then",  "again"};

template <typename T>
const T& pick(std::span<const T> items, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> d(0, items.size() - 1);
  return items[d(rng)];
}

RowVector random_row(Eigen::Index dim, double scale, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, scale);
  RowVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = n(rng);
  return v;
}

Matrix frames(std::size_t count, const RowVector& direction, double label, double noise,
              std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, noise);
  Matrix m(static_cast<Eigen::Index>(count), direction.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = label / 3.0 * direction(c) + n(rng);
  }
  return m;
}

}  // namespace

std::span<const std::string_view> synthetic_positive_words() { return kPositive; }
std::span<const std::string_view> synthetic_negative_words() { return kNegative; }
std::span<const std::string_view> synthetic_neutral_words() { return kNeutral; }

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec) {
  if (spec.utterances == 0 || spec.min_tokens == 0 || spec.max_tokens < spec.min_tokens ||
      spec.min_frames == 0 || spec.max_frames < spec.min_frames || spec.embedding_dim < 1 ||
      spec.visual_dim < 1 || spec.acoustic_dim < 1 || spec.table_size == 0 ||
      spec.table_size > kNeutral.size() || spec.sentiment_fraction < 0.0 ||
      spec.sentiment_fraction > 1.0) {
    throw ConfigError("invalid synthetic corpus spec");
  }

  SyntheticCorpus out;
  out.split.name = SplitName::kTrain;

  for (std::string_view w : kPositive) out.lexicon.insert(w, Polarity::kPositive);
  for (std::string_view w : kNegative) out.lexicon.insert(w, Polarity::kNegative);

  std::mt19937_64 emb_rng(derive_seed(spec.seed, "embeddings"));
  MockLmConfig& lm = out.lm;
  lm.dim = spec.embedding_dim;
  lm.max_k = spec.table_size;
  lm.truncate_to_vocabulary = false;
  lm.fallback = MockLmConfig::Fallback::kHashed;
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.embedding_dim));
  // Sentiment words share a polarity direction so attention has a signal.
  const RowVector pos_dir = random_row(spec.embedding_dim, scale, emb_rng);
  for (std::string_view w : kPositive) {
    lm.embeddings[std::string(w)] = pos_dir + random_row(spec.embedding_dim, 0.5 * scale, emb_rng);
  }
  for (std::string_view w : kNegative) {
    lm.embeddings[std::string(w)] = -pos_dir + random_row(spec.embedding_dim, 0.5 * scale, emb_rng);
  }
  for (std::string_view w : kNeutral) {
    lm.embeddings[std::string(w)] = random_row(spec.embedding_dim, scale, emb_rng);
    lm.fallback_vocabulary.emplace_back(w);
  }

  std::mt19937_64 rng(derive_seed(spec.seed, "utterances"));
  const RowVector v_dir = random_row(spec.visual_dim, 1.0, rng);
  const RowVector a_dir = random_row(spec.acoustic_dim, 1.0, rng);
  std::uniform_int_distribution<std::size_t> len_d(spec.min_tokens, spec.max_tokens);
  std::uniform_int_distribution<std::size_t> frame_d(spec.min_frames, spec.max_frames);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t u = 0; u < spec.utterances; ++u) {
    Utterance utt;
    utt.id = spec.id_prefix + "_" + std::to_string(u);
    const std::size_t len = len_d(rng);
    for (std::size_t t = 0; t < len; ++t) {
      utt.tokens.emplace_back(pick<std::string_view>(kNeutral, rng));
    }

    std::optional<Polarity> polarity;
    std::size_t s = 0;
    if (unit(rng) < spec.sentiment_fraction) {
      polarity = unit(rng) < 0.5 ? Polarity::kPositive : Polarity::kNegative;
      std::uniform_int_distribution<std::size_t> pos_d(0, len - 1);
      s = pos_d(rng);
      utt.tokens[s] = std::string(
          pick<std::string_view>(*polarity == Polarity::kPositive ? kPositive : kNegative, rng));
    }

    if (!polarity) {
      utt.label = unit(rng) < 0.5 ? 0.0 : std::round((unit(rng) - 0.5) * 8.0) / 10.0;
    } else {
      const double mag = 0.5 + 2.5 * unit(rng);
      utt.label = std::round((*polarity == Polarity::kPositive ? mag : -mag) * 10.0) / 10.0;
    }
    utt.visual = frames(frame_d(rng), v_dir, utt.label, 0.5, rng);
    utt.acoustic = frames(frame_d(rng), a_dir, utt.label, 0.5, rng);

    if (polarity) {
      // Mostly same-polarity words, a few neutral ones, best first.
      std::vector<std::string_view> same(
          *polarity == Polarity::kPositive ? kPositive.begin() : kNegative.begin(),
          *polarity == Polarity::kPositive ? kPositive.end() : kNegative.end());
      std::vector<std::string_view> neutral(kNeutral.begin(), kNeutral.end());
      std::shuffle(same.begin(), same.end(), rng);
      std::shuffle(neutral.begin(), neutral.end(), rng);
      std::vector<Candidate> list;
      std::size_t si = 0, ni = 0;
      double weight_sum = 0.0;
      for (std::size_t t = 0; t < spec.table_size; ++t) weight_sum += std::exp(-0.3 * t);
      for (std::size_t t = 0; t < spec.table_size; ++t) {
        const bool sentiment = t == 0 || unit(rng) < 0.8;
        const std::string_view w =
            sentiment && si < same.size() ? same[si++] : neutral[ni++];
        list.push_back({std::string(w), std::exp(-0.3 * t) / weight_sum});
      }
      lm.candidates[candidate_key(utt.tokens, s)] = std::move(list);
    }
    out.split.utterances.push_back(std::move(utt));
  }
  validate_split(out.split);
  return out;
}

}  // namespace swrm
