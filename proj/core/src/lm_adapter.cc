#include "swrm/lm_adapter.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "swrm/errors.h"
#include "swrm/hashing.h"

namespace swrm {

using nlohmann::json;

void validate_candidate_set(const CandidateSet& set) {
  double prev = 1.0;
  for (const Candidate& c : set.candidates) {
    if (!(c.probability > 0.0 && c.probability <= 1.0)) {
      throw std::invalid_argument("candidate '" + c.token + "' probability outside (0, 1]");
    }
    if (c.probability > prev) {
      throw std::invalid_argument("candidate probabilities must be non-increasing");
    }
    prev = c.probability;
  }
  if (set.sentiment_count > set.candidates.size()) {
    throw std::invalid_argument("sentiment_count exceeds candidate count");
  }
}

Matrix embed_tokens(const LmAdapter& lm, std::span<const std::string> tokens) {
  Matrix out(static_cast<Eigen::Index>(tokens.size()), lm.dim());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = lm.embed_token(tokens[i]);
  }
  return out;
}

std::string candidate_key(std::span<const std::string> tokens, std::size_t position) {
  return masked_context_key(tokens, position);
}

namespace {

void check_position(std::span<const std::string> tokens, std::size_t position, std::size_t k) {
  if (position >= tokens.size()) {
    throw std::out_of_range("candidate position " + std::to_string(position) +
                            " outside sentence of length " + std::to_string(tokens.size()));
  }
  if (k == 0) throw std::invalid_argument("k must be at least 1");
}

CandidateSet take_top(std::vector<Candidate> list, std::size_t position, std::size_t k,
                      bool truncate, const std::string& key) {
  if (list.size() < k) {
    if (!truncate) {
      throw AdapterError(AdapterError::Kind::kPermanent,
                         "only " + std::to_string(list.size()) + " candidates available for " +
                             key + ", " + std::to_string(k) + " requested");
    }
  } else {
    list.resize(k);
  }
  CandidateSet set;
  set.position = position;
  set.candidates = std::move(list);
  return set;
}

RowVector parse_vector(const json& j, Eigen::Index dim, const std::string& what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != dim) {
    throw ConfigError(what + ": expected a vector of length " + std::to_string(dim));
  }
  RowVector v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  if (!v.allFinite()) throw ConfigError(what + ": non-finite entry");
  return v;
}

json vector_to_json(const RowVector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

std::vector<Candidate> parse_candidate_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": candidates must be an array");
  std::vector<Candidate> out;
  for (const json& c : j) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_string() || !c[1].is_number()) {
      throw ConfigError(where + ": candidate must be [token, probability]");
    }
    out.push_back({c[0].get<std::string>(), c[1].get<double>()});
  }
  CandidateSet probe;
  probe.candidates = out;
  try {
    validate_candidate_set(probe);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return out;
}

// Greedy longest-match word-piece split; empty if the word cannot be covered.
template <typename Contains>
std::vector<std::string> wordpieces(std::string_view word, const Contains& contains) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  while (start < word.size()) {
    std::size_t end = word.size();
    std::string found;
    while (end > start) {
      std::string piece(word.substr(start, end - start));
      if (start > 0) piece = "##" + piece;
      if (contains(piece)) {
        found = std::move(piece);
        break;
      }
      --end;
    }
    if (found.empty()) return {};
    pieces.push_back(std::move(found));
    start = end;
  }
  return pieces;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

MockLmConfig parse_mock_lm_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("mock LM config: ") + e.what());
  }
  MockLmConfig c;
  try {
    c.dim = j.at("dim").get<Eigen::Index>();
    c.max_k = j.value("max_k", std::size_t{50});
    c.truncate_to_vocabulary = j.value("truncate_to_vocabulary", false);
    if (c.dim < 1) throw ConfigError("mock LM config: dim must be positive");
    if (j.contains("mask_embedding")) {
      c.mask_embedding = parse_vector(j["mask_embedding"], c.dim, "mask_embedding");
    }
    if (j.contains("unk_embedding")) {
      c.unk_embedding = parse_vector(j["unk_embedding"], c.dim, "unk_embedding");
    }
    const json embeddings = j.value("embeddings", json::object());
    for (const auto& [token, vec] : embeddings.items()) {
      c.embeddings[token] = parse_vector(vec, c.dim, "embedding of '" + token + "'");
    }
    const json candidates = j.value("candidates", json::object());
    for (const auto& [key, list] : candidates.items()) {
      c.candidates[key] = parse_candidate_list(list, "candidates[" + key + "]");
    }
    const std::string fallback = j.value("fallback", std::string("error"));
    if (fallback == "error") {
      c.fallback = MockLmConfig::Fallback::kError;
    } else if (fallback == "hashed") {
      c.fallback = MockLmConfig::Fallback::kHashed;
    } else {
      throw ConfigError("mock LM config: unknown fallback '" + fallback + "'");
    }
    c.fallback_vocabulary =
        j.value("fallback_vocabulary", std::vector<std::string>{});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mock LM config: ") + e.what());
  }
  return c;
}

MockLmConfig load_mock_lm_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock LM config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_mock_lm_config(ss.str());
}

std::string mock_lm_config_to_json(const MockLmConfig& c) {
  json j;
  j["dim"] = c.dim;
  j["max_k"] = c.max_k;
  j["truncate_to_vocabulary"] = c.truncate_to_vocabulary;
  if (c.mask_embedding) j["mask_embedding"] = vector_to_json(*c.mask_embedding);
  if (c.unk_embedding) j["unk_embedding"] = vector_to_json(*c.unk_embedding);
  json emb = json::object();
  for (const auto& [token, vec] : c.embeddings) emb[token] = vector_to_json(vec);
  j["embeddings"] = std::move(emb);
  json cands = json::object();
  for (const auto& [key, list] : c.candidates) {
    json arr = json::array();
    for (const Candidate& cand : list) arr.push_back(json::array({cand.token, cand.probability}));
    cands[key] = std::move(arr);
  }
  j["candidates"] = std::move(cands);
  j["fallback"] = c.fallback == MockLmConfig::Fallback::kHashed ? "hashed" : "error";
  j["fallback_vocabulary"] = c.fallback_vocabulary;
  return j.dump();
}

void save_mock_lm_config(const std::filesystem::path& path, const MockLmConfig& config) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write mock LM config " + path.string());
  out << mock_lm_config_to_json(config) << '\n';
}

MockLm::MockLm(MockLmConfig config) : config_(std::move(config)) {
  if (config_.dim < 1) throw ConfigError("mock LM: dim must be positive");
  for (const auto& [token, vec] : config_.embeddings) {
    if (vec.size() != config_.dim) {
      throw ConfigError("mock LM: embedding of '" + token + "' has wrong dimension");
    }
  }
  for (const auto& [key, list] : config_.candidates) {
    CandidateSet probe;
    probe.candidates = list;
    try {
      validate_candidate_set(probe);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("mock LM: candidates[" + key + "]: " + e.what());
    }
  }
  mask_ = config_.mask_embedding.value_or(RowVector::Zero(config_.dim));
  unk_ = config_.unk_embedding.value_or(RowVector::Zero(config_.dim));
  if (mask_.size() != config_.dim || unk_.size() != config_.dim) {
    throw ConfigError("mock LM: mask/unk embedding has wrong dimension");
  }
  if (config_.fallback_vocabulary.empty()) {
    for (const auto& [token, vec] : config_.embeddings) {
      if (token.rfind("##", 0) != 0) config_.fallback_vocabulary.push_back(token);
    }
  }
}

std::vector<Candidate> MockLm::hashed_candidates(const std::string& key) const {
  const auto& vocab = config_.fallback_vocabulary;
  std::vector<std::pair<double, const std::string*>> scored;
  scored.reserve(vocab.size());
  double max_logit = -1e300;
  for (const std::string& w : vocab) {
    const std::uint64_t h = splitmix64(fnv1a64(key + "|" + w));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    const double logit = 4.0 * u;
    max_logit = std::max(max_logit, logit);
    scored.emplace_back(logit, &w);
  }
  double z = 0.0;
  for (auto& [logit, w] : scored) {
    logit = std::exp(logit - max_logit);
    z += logit;
  }
  std::vector<Candidate> out;
  out.reserve(scored.size());
  for (const auto& [e, w] : scored) out.push_back({*w, e / z});
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.probability != b.probability) return a.probability > b.probability;
    return a.token < b.token;
  });
  return out;
}

CandidateSet MockLm::top_k_candidates(std::span<const std::string> tokens, std::size_t position,
                                      std::size_t k) const {
  check_position(tokens, position, k);
  if (k > config_.max_k) {
    throw AdapterError(AdapterError::Kind::kPermanent,
                       "k=" + std::to_string(k) + " exceeds adapter max_k=" +
                           std::to_string(config_.max_k));
  }
  const std::string key = candidate_key(tokens, position);
  if (auto it = config_.candidates.find(key); it != config_.candidates.end()) {
    return take_top(it->second, position, k, config_.truncate_to_vocabulary, key);
  }
  if (config_.fallback == MockLmConfig::Fallback::kHashed) {
    return take_top(hashed_candidates(key), position, k, config_.truncate_to_vocabulary, key);
  }
  throw AdapterError(AdapterError::Kind::kPermanent, "mock LM has no candidates for " + key);
}

RowVector MockLm::embed_token(std::string_view token) const {
  const std::string exact(token);
  if (auto it = config_.embeddings.find(exact); it != config_.embeddings.end()) {
    return it->second;
  }
  const std::string lowered = lower_ascii(token);
  if (auto it = config_.embeddings.find(lowered); it != config_.embeddings.end()) {
    return it->second;
  }
  const auto pieces = wordpieces(lowered, [this](const std::string& p) {
    return config_.embeddings.count(p) > 0;
  });
  if (pieces.empty()) return unk_;
  RowVector acc = RowVector::Zero(config_.dim);
  for (const auto& p : pieces) acc += config_.embeddings.at(p);
  return acc / static_cast<double>(pieces.size());
}

std::string MockLm::describe() const {
  return "mock:dim=" + std::to_string(config_.dim) + ":max_k=" + std::to_string(config_.max_k);
}

CachedLm::CachedLm(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw AdapterError(AdapterError::Kind::kPermanent,
                       "LM cache directory " + dir.string() + " does not exist");
  }
  std::string mask_token = "[MASK]", unk_token = "[UNK]";
  {
    std::ifstream in(dir / "meta.json");
    if (!in) throw AdapterError(AdapterError::Kind::kPermanent, "LM cache lacks meta.json");
    try {
      json meta = json::parse(in);
      dim_ = meta.at("dim").get<Eigen::Index>();
      max_k_ = meta.at("max_k").get<std::size_t>();
      mask_token = meta.value("mask_token", mask_token);
      unk_token = meta.value("unk_token", unk_token);
      model_ = meta.value("model", std::string("unknown"));
    } catch (const json::exception& e) {
      throw AdapterError(AdapterError::Kind::kPermanent, std::string("bad meta.json: ") + e.what());
    }
  }
  {
    std::ifstream in(dir / "vocab.txt");
    if (!in) throw AdapterError(AdapterError::Kind::kPermanent, "LM cache lacks vocab.txt");
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) vocab_.emplace(line, row++);
    if (in.bad()) throw AdapterError(AdapterError::Kind::kTransient, "failed reading vocab.txt");
  }
  {
    std::ifstream in(dir / "embeddings.f32", std::ios::binary);
    if (!in) throw AdapterError(AdapterError::Kind::kPermanent, "LM cache lacks embeddings.f32");
    table_.resize(vocab_.size() * static_cast<std::size_t>(dim_));
    in.read(reinterpret_cast<char*>(table_.data()),
            static_cast<std::streamsize>(table_.size() * sizeof(float)));
    if (in.bad()) {
      throw AdapterError(AdapterError::Kind::kTransient, "failed reading embeddings.f32");
    }
    if (static_cast<std::size_t>(in.gcount()) != table_.size() * sizeof(float)) {
      throw AdapterError(AdapterError::Kind::kPermanent,
                         "embeddings.f32 is shorter than vocab_size x dim");
    }
  }
  {
    std::ifstream in(dir / "candidates.jsonl");
    if (!in) throw AdapterError(AdapterError::Kind::kPermanent, "LM cache lacks candidates.jsonl");
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        json rec = json::parse(line);
        const std::string key = rec.at("key").get<std::string>();
        candidates_[key] = parse_candidate_list(rec.at("candidates"), key);
      } catch (const std::exception& e) {
        throw AdapterError(AdapterError::Kind::kPermanent,
                           std::string("bad candidates.jsonl record: ") + e.what());
      }
    }
    if (in.bad()) throw AdapterError(AdapterError::Kind::kTransient, "failed reading candidates");
  }
  mask_ = row_of(mask_token).value_or(RowVector::Zero(dim_));
  unk_ = row_of(unk_token).value_or(RowVector::Zero(dim_));
}

std::optional<RowVector> CachedLm::row_of(std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  if (it == vocab_.end()) return std::nullopt;
  RowVector v(dim_);
  const float* src = table_.data() + it->second * static_cast<std::size_t>(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) v(i) = static_cast<double>(src[i]);
  return v;
}

CandidateSet CachedLm::top_k_candidates(std::span<const std::string> tokens,
                                        std::size_t position, std::size_t k) const {
  check_position(tokens, position, k);
  if (k > max_k_) {
    throw AdapterError(AdapterError::Kind::kPermanent,
                       "k=" + std::to_string(k) + " exceeds cached max_k=" + std::to_string(max_k_));
  }
  const std::string key = candidate_key(tokens, position);
  auto it = candidates_.find(key);
  if (it == candidates_.end()) {
    throw AdapterError(AdapterError::Kind::kPermanent,
                       "no cached candidates for " + key + "; re-export the LM cache");
  }
  return take_top(it->second, position, k, false, key);
}

RowVector CachedLm::embed_token(std::string_view token) const {
  if (auto v = row_of(token)) return *v;
  const std::string lowered = lower_ascii(token);
  if (auto v = row_of(lowered)) return *v;
  const auto pieces = wordpieces(lowered, [this](const std::string& p) {
    return vocab_.count(p) > 0;
  });
  if (pieces.empty()) return unk_;
  RowVector acc = RowVector::Zero(dim_);
  for (const auto& p : pieces) acc += *row_of(p);
  return acc / static_cast<double>(pieces.size());
}

}  // namespace swrm
