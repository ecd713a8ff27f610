#include "run_config.h"

#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "swrm/errors.h"
#include "swrm/lexicon.h"

namespace swrm::cli {

using nlohmann::json;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const char* where) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
  }
}

void apply_model_overrides(ModelConfig& m, const json& j) {
  check_keys(j,
             {"ffn_dim", "d_h_v", "d_h_a", "d_h_va", "d_v_l", "d_v_a", "d_v_v", "d_v_f",
              "pooling", "task_weights", "d_x", "visual_dim", "acoustic_dim", "k", "ablations"},
             "model");
  auto set = [&j](const char* key, Eigen::Index& field) {
    if (j.contains(key)) field = j.at(key).get<Eigen::Index>();
  };
  set("ffn_dim", m.ffn_dim);
  set("d_h_v", m.d_h_v);
  set("d_h_a", m.d_h_a);
  set("d_h_va", m.d_h_va);
  set("d_v_l", m.d_v_l);
  set("d_v_a", m.d_v_a);
  set("d_v_v", m.d_v_v);
  set("d_v_f", m.d_v_f);
  // Widths resolved from data are accepted (effective configs contain them)
  // but recomputed at run time.
  if (j.contains("pooling")) m.pooling = parse_pooling(j.at("pooling").get<std::string>());
  if (j.contains("task_weights")) {
    const json& w = j.at("task_weights");
    check_keys(w, {"l", "v", "a"}, "model.task_weights");
    m.task_weights = {w.value("l", 1.0), w.value("v", 1.0), w.value("a", 1.0)};
  }
}

}  // namespace

void apply_ablation(Ablations& a, const std::string& name) {
  if (name == "position") a.no_position = true;
  else if (name == "attention") a.no_attention = true;
  else if (name == "multimodal") a.no_multimodal = true;
  else throw ConfigError("unknown ablation '" + name + "' (position, attention, multimodal)");
}

void apply_config_json(RunConfig& c, const std::string& text, const fs::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  try {
    check_keys(j,
               {"dataset", "train", "valid", "test", "checkpoint", "predictions", "lexicons",
                "adapter", "mock_config", "lm_cache", "k", "seed", "preset", "model",
                "training", "ablate", "corruption", "synth_utterances", "out"},
               "config");
    auto path = [&](const char* key, std::optional<fs::path>& field) {
      if (j.contains(key) && !j.at(key).is_null()) {
        field = resolve(base, j.at(key).get<std::string>());
      }
    };
    path("dataset", c.dataset);
    path("train", c.train);
    path("valid", c.valid);
    path("test", c.test);
    path("checkpoint", c.checkpoint);
    path("predictions", c.predictions);
    path("mock_config", c.mock_config);
    path("lm_cache", c.lm_cache);
    path("out", c.out);
    if (j.contains("lexicons")) {
      c.lexicons.clear();
      for (const auto& p : j.at("lexicons")) c.lexicons.push_back(resolve(base, p.get<std::string>()));
    }
    if (j.contains("adapter")) c.adapter = j.at("adapter").get<std::string>();
    if (j.contains("preset")) {
      const std::string preset = j.at("preset").get<std::string>();
      const ModelConfig fresh = preset_config(preset);
      c.preset = preset;
      // Keep k and ablations, which are not part of a preset.
      const std::size_t k = c.model.k;
      const Ablations ab = c.model.ablations;
      c.model = fresh;
      c.model.k = k;
      c.model.ablations = ab;
      c.training.batch_size = preset_batch_size(preset);
    }
    if (j.contains("model")) apply_model_overrides(c.model, j.at("model"));
    if (j.contains("k")) c.model.k = j.at("k").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("ablate")) {
      c.model.ablations = {};
      for (const auto& a : j.at("ablate")) apply_ablation(c.model.ablations, a.get<std::string>());
    }
    if (j.contains("training")) {
      const json& t = j.at("training");
      check_keys(t,
                 {"optimizer", "learning_rate", "beta1", "beta2", "epsilon", "batch_size",
                  "seeds", "epochs", "patience"},
                 "training");
      TrainConfig& tc = c.training;
      tc.optimizer = t.value("optimizer", tc.optimizer);
      tc.learning_rate = t.value("learning_rate", tc.learning_rate);
      tc.beta1 = t.value("beta1", tc.beta1);
      tc.beta2 = t.value("beta2", tc.beta2);
      tc.epsilon = t.value("epsilon", tc.epsilon);
      tc.batch_size = t.value("batch_size", tc.batch_size);
      if (t.contains("seeds")) tc.seeds = t.at("seeds").get<std::vector<std::uint64_t>>();
      tc.epochs = t.value("epochs", tc.epochs);
      tc.patience = t.value("patience", tc.patience);
    }
    if (j.contains("corruption")) {
      const json& cr = j.at("corruption");
      check_keys(cr, {"rate", "policy"}, "corruption");
      c.corruption_rate = cr.value("rate", c.corruption_rate);
      if (cr.contains("policy")) {
        c.policy = parse_substitution_policy(cr.at("policy").get<std::string>());
      }
    }
    if (j.contains("synth_utterances")) {
      c.synth_utterances = j.at("synth_utterances").get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void apply_config_file(RunConfig& c, const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_json(c, ss.str(), fs::absolute(path).parent_path());
}

std::string to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  auto path = [&j](const char* key, const std::optional<fs::path>& p) {
    j[key] = p ? json(fs::absolute(*p).lexically_normal().string()) : json(nullptr);
  };
  path("dataset", c.dataset);
  path("train", c.train);
  path("valid", c.valid);
  path("test", c.test);
  path("checkpoint", c.checkpoint);
  path("predictions", c.predictions);
  std::vector<std::string> lex;
  for (const auto& p : c.lexicons) lex.push_back(fs::absolute(p).lexically_normal().string());
  j["lexicons"] = lex;
  j["adapter"] = c.adapter;
  path("mock_config", c.mock_config);
  path("lm_cache", c.lm_cache);
  j["k"] = c.model.k;
  j["seed"] = c.seed;
  j["preset"] = c.preset;
  std::vector<std::string> ablate;
  if (c.model.ablations.no_position) ablate.emplace_back("position");
  if (c.model.ablations.no_attention) ablate.emplace_back("attention");
  if (c.model.ablations.no_multimodal) ablate.emplace_back("multimodal");
  j["ablate"] = ablate;
  const ModelConfig& m = c.model;
  j["model"] = {{"ffn_dim", m.ffn_dim},   {"d_h_v", m.d_h_v}, {"d_h_a", m.d_h_a},
                {"d_h_va", m.d_h_va},     {"d_v_l", m.d_v_l}, {"d_v_a", m.d_v_a},
                {"d_v_v", m.d_v_v},       {"d_v_f", m.d_v_f},
                {"pooling", std::string(to_string(m.pooling))},
                {"task_weights", {{"l", m.task_weights.l}, {"v", m.task_weights.v},
                                  {"a", m.task_weights.a}}}};
  const TrainConfig& t = c.training;
  nlohmann::ordered_json tj;
  tj["optimizer"] = t.optimizer;
  tj["learning_rate"] = t.learning_rate;
  tj["beta1"] = t.beta1;
  tj["beta2"] = t.beta2;
  tj["epsilon"] = t.epsilon;
  tj["batch_size"] = t.batch_size;
  tj["seeds"] = t.seeds;
  tj["epochs"] = t.epochs;
  tj["patience"] = t.patience;
  j["training"] = tj;
  j["corruption"] = {{"rate", c.corruption_rate}, {"policy", std::string(to_string(c.policy))}};
  j["synth_utterances"] = c.synth_utterances;
  path("out", c.out);
  return j.dump(2);
}

fs::path require_path(const std::optional<fs::path>& path, const char* what) {
  if (!path) throw ConfigError(std::string("missing required path: ") + what);
  if (!fs::exists(*path)) {
    throw ConfigError(std::string(what) + " does not exist: " + path->string());
  }
  return *path;
}

fs::path require_out(const RunConfig& c) {
  if (!c.out) throw ConfigError("missing required path: --out");
  fs::create_directories(*c.out);
  return *c.out;
}

std::unique_ptr<LmAdapter> make_adapter(const RunConfig& c) {
  if (c.adapter == "mock") {
    return std::make_unique<MockLm>(load_mock_lm_config(require_path(c.mock_config, "mock_config")));
  }
  if (c.adapter == "real") {
    std::optional<fs::path> dir = c.lm_cache;
    if (!dir) {
      if (const char* env = std::getenv(kLmCacheEnv); env && *env) dir = fs::path(env);
    }
    if (!dir) {
      throw ConfigError(std::string("adapter 'real' needs lm_cache or the ") + kLmCacheEnv +
                        " environment variable");
    }
    return std::make_unique<CachedLm>(require_path(dir, "lm_cache"));
  }
  if (c.adapter.empty()) throw ConfigError("no adapter configured (--adapter mock|real)");
  throw ConfigError("unknown adapter '" + c.adapter + "' (expected mock or real)");
}

SentimentLexicon load_configured_lexicon(const RunConfig& c) {
  if (c.lexicons.empty()) throw ConfigError("missing required path: lexicons");
  for (const auto& p : c.lexicons) require_path(p, "lexicon");
  return load_lexicon(c.lexicons);
}

ModelConfig resolve_model_config(const RunConfig& c, const LmAdapter& lm,
                                 const DatasetSplit& reference) {
  if (reference.empty()) throw ConfigError("dataset is empty");
  ModelConfig m = c.model;
  m.d_x = lm.dim();
  m.visual_dim = reference.utterances.front().visual.cols();
  m.acoustic_dim = reference.utterances.front().acoustic.cols();
  validate_model_config(m);
  return m;
}

}  // namespace swrm::cli
