#include "swrm/checkpoint.h"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "oracles.h"
#include "swrm/errors.h"
#include "tiny_pipeline.h"

namespace swrm {
namespace {

using nlohmann::json;
using testing::TempDir;
using testing::TinyPipeline;

TEST(Checkpoint, RoundTripPreservesPredictionsExactly) {
  TinyPipeline t(4);
  const SwrmModel m(t.config, 77);
  TempDir dir;
  save_checkpoint(dir / "m.json", m, 1113, "mock:test");
  const Checkpoint c = load_checkpoint(dir / "m.json", t.config);
  EXPECT_EQ(c.seed, 1113u);
  EXPECT_EQ(c.adapter, "mock:test");
  EXPECT_EQ(c.config_hash, config_hash(t.config));
  for (const auto& s : t.samples) EXPECT_EQ(c.model.predict(s).p_f, m.predict(s).p_f);
}

TEST(Checkpoint, ConfigMismatchRefused) {
  TinyPipeline t(1);
  TempDir dir;
  save_checkpoint(dir / "m.json", SwrmModel(t.config, 1), 1);
  ModelConfig other = t.config;
  other.d_v_f += 2;
  EXPECT_THROW(load_checkpoint(dir / "m.json", other), ConfigError);
}

TEST(Checkpoint, TamperedFilesRejected) {
  TinyPipeline t(1);
  TempDir dir;
  save_checkpoint(dir / "m.json", SwrmModel(t.config, 1), 1);
  const json good = json::parse(testing::read_file(dir / "m.json"));

  json missing = good;
  missing["tensors"].erase(missing["tensors"].begin());
  dir.write("missing.json", missing.dump());
  EXPECT_THROW(load_checkpoint(dir / "missing.json"), SchemaError);

  json bad_hash = good;
  bad_hash["config_hash"] = "0000000000000000";
  dir.write("hash.json", bad_hash.dump());
  EXPECT_THROW(load_checkpoint(dir / "hash.json"), ConfigError);

  json reshaped = good;
  auto& first = reshaped["tensors"].begin().value();
  first["rows"] = first["rows"].get<int>() + 1;
  dir.write("shape.json", reshaped.dump());
  EXPECT_THROW(load_checkpoint(dir / "shape.json"), SchemaError);

  dir.write("junk.json", "{not json");
  EXPECT_THROW(load_checkpoint(dir / "junk.json"), LoadError);
  EXPECT_THROW(load_checkpoint(dir / "absent.json"), LoadError);
}

}  // namespace
}  // namespace swrm
