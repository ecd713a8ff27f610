#ifndef SWRM_CHECKPOINT_H_
#define SWRM_CHECKPOINT_H_

// Self-describing JSON archive of a trained model:
//   {"format": "swrm-checkpoint", "version": 1, "config": {...},
//    "config_hash": "<hex>", "seed": 1111, "adapter": "...",
//    "tensors": {"<name>": {"rows": r, "cols": c, "data": [...]}, ...}}

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "swrm/model.h"

namespace swrm {

struct Checkpoint {
  SwrmModel model;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::string adapter;
};

void save_checkpoint(const std::filesystem::path& path, const SwrmModel& model,
                     std::uint64_t seed, const std::string& adapter = "");

// Throws LoadError for unreadable or malformed files, SchemaError for
// missing or mis-shaped tensors and ConfigError when the stored hash does not
// match the stored config, or `expected` is given and hashes differently.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace swrm

#endif  // SWRM_CHECKPOINT_H_
