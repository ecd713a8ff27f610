#ifndef SWRM_LM_ADAPTER_H_
#define SWRM_LM_ADAPTER_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "swrm/autograd.h"

namespace swrm {

struct Candidate {
  std::string token;
  double probability = 0.0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

// Top-k fillers predicted for one masked position, most probable first.
struct CandidateSet {
  std::size_t position = 0;
  std::vector<Candidate> candidates;
  // Number of candidates that are lexicon words; set by the detector.
  std::size_t sentiment_count = 0;

  std::size_t size() const { return candidates.size(); }
};

// Throws std::invalid_argument unless probabilities lie in (0, 1] and are
// non-increasing, and sentiment_count <= size().
void validate_candidate_set(const CandidateSet& set);

// Pretrained masked language model, as seen by the pipeline. Implementations
// are immutable after construction and safe for concurrent queries.
class LmAdapter {
 public:
  virtual ~LmAdapter() = default;

  // Masks tokens[position] and returns the k most probable whole-word
  // fillers. Throws AdapterError on failure, and std::out_of_range for a bad
  // position. If fewer than k fillers exist, returns all of them when
  // truncates_to_vocabulary() is true and throws a permanent AdapterError
  // otherwise.
  virtual CandidateSet top_k_candidates(std::span<const std::string> tokens,
                                        std::size_t position, std::size_t k) const = 0;

  // Input-layer embedding. Total: out-of-vocabulary words are averaged over
  // their word pieces, falling back to the unknown-token embedding.
  virtual RowVector embed_token(std::string_view token) const = 0;

  // Embedding of the mask token; constant per instance.
  virtual RowVector mask_embedding() const = 0;

  virtual Eigen::Index dim() const = 0;

  // Largest k the adapter can serve.
  virtual std::size_t max_k() const = 0;
  virtual bool truncates_to_vocabulary() const = 0;

  // Short identity string recorded in checkpoints.
  virtual std::string describe() const = 0;
};

// Rows are embed_token() of each token.
Matrix embed_tokens(const LmAdapter& lm, std::span<const std::string> tokens);

// Candidate table entry key for a masked sentence; see masked_context_key().
std::string candidate_key(std::span<const std::string> tokens, std::size_t position);

// ---------------------------------------------------------------------------
// Deterministic table-driven adapter for offline use and tests.
//
// JSON configuration:
//   {
//     "dim": 8,
//     "max_k": 50,
//     "truncate_to_vocabulary": false,
//     "mask_embedding": [...],            // optional, zeros by default
//     "unk_embedding": [...],             // optional, zeros by default
//     "embeddings": {"good": [...], ...},
//     "candidates": {"<hex>:<pos>": [["upset", 0.3], ["set", 0.1]], ...},
//     "fallback": "error" | "hashed",     // for keys missing from the table
//     "fallback_vocabulary": ["...", ...] // optional, defaults to embedding keys
//   }
//
// Keys are candidate_key(tokens, position): FNV-1a 64 of the tokens joined by
// single spaces with the masked one replaced by "[MASK]", as 16 lower-case
// hex digits, then ":" and the position.
//
// The "hashed" fallback scores every fallback-vocabulary word with a
// hash of (key, word), applies a softmax to 4 * score and returns the top k.
struct MockLmConfig {
  enum class Fallback { kError, kHashed };

  Eigen::Index dim = 0;
  std::size_t max_k = 50;
  bool truncate_to_vocabulary = false;
  std::optional<RowVector> mask_embedding;
  std::optional<RowVector> unk_embedding;
  std::map<std::string, RowVector> embeddings;
  std::map<std::string, std::vector<Candidate>> candidates;
  Fallback fallback = Fallback::kError;
  std::vector<std::string> fallback_vocabulary;
};

MockLmConfig parse_mock_lm_config(std::string_view json_text);
MockLmConfig load_mock_lm_config(const std::filesystem::path& path);
std::string mock_lm_config_to_json(const MockLmConfig& config);
void save_mock_lm_config(const std::filesystem::path& path, const MockLmConfig& config);

class MockLm final : public LmAdapter {
 public:
  // Validates dimensions and candidate lists; throws ConfigError.
  explicit MockLm(MockLmConfig config);

  CandidateSet top_k_candidates(std::span<const std::string> tokens, std::size_t position,
                                std::size_t k) const override;
  RowVector embed_token(std::string_view token) const override;
  RowVector mask_embedding() const override { return mask_; }
  Eigen::Index dim() const override { return config_.dim; }
  std::size_t max_k() const override { return config_.max_k; }
  bool truncates_to_vocabulary() const override { return config_.truncate_to_vocabulary; }
  std::string describe() const override;

  const MockLmConfig& config() const { return config_; }

 private:
  std::vector<Candidate> hashed_candidates(const std::string& key) const;

  MockLmConfig config_;
  RowVector mask_;
  RowVector unk_;
};

// ---------------------------------------------------------------------------
// Adapter backed by an exported cache of a real masked LM (see
// tools/export_lm_cache.py). Directory layout:
//   meta.json        {"dim", "max_k", "mask_token", "unk_token", "model"}
//   vocab.txt        one token per line (row order of embeddings.f32)
//   embeddings.f32   little-endian float32, vocab_size x dim, row-major
//   candidates.jsonl {"key": "<hex>:<pos>", "candidates": [[tok, prob], ...]}
// A context missing from the cache raises a permanent AdapterError; failing
// reads raise transient ones.
class CachedLm final : public LmAdapter {
 public:
  explicit CachedLm(const std::filesystem::path& dir);

  CandidateSet top_k_candidates(std::span<const std::string> tokens, std::size_t position,
                                std::size_t k) const override;
  RowVector embed_token(std::string_view token) const override;
  RowVector mask_embedding() const override { return mask_; }
  Eigen::Index dim() const override { return dim_; }
  std::size_t max_k() const override { return max_k_; }
  bool truncates_to_vocabulary() const override { return false; }
  std::string describe() const override { return "cached:" + model_; }

 private:
  std::optional<RowVector> row_of(std::string_view token) const;

  Eigen::Index dim_ = 0;
  std::size_t max_k_ = 0;
  std::string model_;
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<float> table_;
  std::unordered_map<std::string, std::vector<Candidate>> candidates_;
  RowVector mask_;
  RowVector unk_;
};

// Name of the environment variable pointing at the CachedLm directory.
inline constexpr const char* kLmCacheEnv = "SWRM_LM_CACHE";

}  // namespace swrm

#endif  // SWRM_LM_ADAPTER_H_
