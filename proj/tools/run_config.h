#ifndef SWRM_TOOLS_RUN_CONFIG_H_
#define SWRM_TOOLS_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swrm/corpus.h"
#include "swrm/lm_adapter.h"
#include "swrm/model.h"
#include "swrm/trainer.h"

namespace swrm::cli {

namespace fs = std::filesystem;

// Everything a command may need. Built from defaults, then a JSON config
// file, then command-line flags, in that order.
struct RunConfig {
  std::optional<fs::path> dataset;
  std::optional<fs::path> train;
  std::optional<fs::path> valid;
  std::optional<fs::path> test;
  std::optional<fs::path> checkpoint;
  std::optional<fs::path> predictions;
  std::vector<fs::path> lexicons;

  std::string adapter;  // "", "mock" or "real"
  std::optional<fs::path> mock_config;
  std::optional<fs::path> lm_cache;

  std::uint64_t seed = 1111;
  bool seed_set = false;  // --seed on the command line replaces the seed list
  std::string preset = "mosi-speechbrain";
  ModelConfig model = preset_config("mosi-speechbrain");
  TrainConfig training;

  double corruption_rate = 0.3;
  SubstitutionPolicy policy = SubstitutionPolicy::kPhoneticTruncate;

  std::size_t synth_utterances = 96;

  std::optional<fs::path> out;
};

// Applies a JSON document on top of `config`. Relative paths are resolved
// against `base_dir`. Throws ConfigError on unknown keys or bad values.
void apply_config_json(RunConfig& config, const std::string& json_text,
                       const fs::path& base_dir);
void apply_config_file(RunConfig& config, const fs::path& path);

// Parses "position", "attention" or "multimodal" into the ablation flags.
void apply_ablation(Ablations& ablations, const std::string& name);

// Resolved configuration, re-loadable with apply_config_file. Paths are
// written as absolute paths.
std::string to_json(const RunConfig& config);

// Throws ConfigError when a required path is unset or does not exist.
fs::path require_path(const std::optional<fs::path>& path, const char* what);
fs::path require_out(const RunConfig& config);

// The adapter named by the config. "real" reads the cache directory from
// lm_cache, falling back to the SWRM_LM_CACHE environment variable.
std::unique_ptr<LmAdapter> make_adapter(const RunConfig& config);

SentimentLexicon load_configured_lexicon(const RunConfig& config);

// Model config with embedding and feature widths taken from the adapter and
// the first utterance of `reference`.
ModelConfig resolve_model_config(const RunConfig& config, const LmAdapter& lm,
                                 const DatasetSplit& reference);

}  // namespace swrm::cli

#endif  // SWRM_TOOLS_RUN_CONFIG_H_
