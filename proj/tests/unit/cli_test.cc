#include "cli.h"

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>
#include <sstream>

#include "oracles.h"

namespace swrm {
namespace {

using nlohmann::json;
using testing::read_file;
using testing::read_lines;
using testing::TempDir;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result swrm(std::vector<std::string> args) {
  args.insert(args.begin(), "swrm");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// One synthetic corpus and a short two-seed training run shared by the
// tests below.
class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir();
    const Result s = swrm({"synth", "--out", (*dir_ / "data").string(), "--utterances", "40",
                           "--seed", "5"});
    ASSERT_EQ(s.code, 0) << s.err;
    const Result t = swrm({"train", "--config", config(), "--out", (*dir_ / "run").string(),
                           "--epochs", "2", "--seeds", "1111", "1112"});
    ASSERT_EQ(t.code, 0) << t.err;
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static std::string config() { return (*dir_ / "data" / "config.json").string(); }
  static std::filesystem::path path(const std::string& rel) { return dir_->path() / rel; }

  static TempDir* dir_;
};

TempDir* CliPipeline::dir_ = nullptr;

TEST_F(CliPipeline, SynthWritesCorpusLexiconAndMock) {
  for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl", "lexicon.tsv",
                        "mock_lm.json", "config.json"}) {
    EXPECT_TRUE(std::filesystem::exists(path(std::string("data/") + f))) << f;
  }
  const json cfg = json::parse(read_file(path("data/config.json")));
  EXPECT_EQ(cfg.at("adapter"), "mock");
}

TEST_F(CliPipeline, TrainWritesPerSeedArtifacts) {
  for (const char* seed : {"seed_1111", "seed_1112"}) {
    const auto d = path(std::string("run/") + seed);
    EXPECT_TRUE(std::filesystem::exists(d / "checkpoint.json"));
    EXPECT_EQ(read_lines(d / "train_log.jsonl").size(), 2u);
    const json m = json::parse(read_file(d / "metrics.json"));
    EXPECT_TRUE(m.contains("test"));
  }
  const json mean = json::parse(read_file(path("run/metrics_mean.json")));
  EXPECT_EQ(mean.at("seeds"), json::array({1111, 1112}));
  const std::string report = read_file(path("run/report.txt"));
  EXPECT_NE(report.find("mean"), std::string::npos);
  EXPECT_NE(report.find("Has0-Acc"), std::string::npos);
}

TEST_F(CliPipeline, RerunFromEffectiveConfigIsByteIdentical) {
  const Result r = swrm({"train", "--config", path("run/effective_config.json").string(), "--out",
                         path("rerun").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_file(path("rerun/report.txt")), read_file(path("run/report.txt")));
  EXPECT_EQ(read_file(path("rerun/metrics_mean.json")), read_file(path("run/metrics_mean.json")));
  json a = json::parse(read_file(path("run/effective_config.json")));
  json b = json::parse(read_file(path("rerun/effective_config.json")));
  a.erase("out");
  b.erase("out");
  EXPECT_EQ(a, b);
}

TEST_F(CliPipeline, EvaluateReproducesTrainingMetrics) {
  const Result r = swrm({"evaluate", "--config", config(), "--checkpoint",
                         path("run/seed_1111/checkpoint.json").string(), "--out",
                         path("eval").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json seed = json::parse(read_file(path("run/seed_1111/metrics.json")));
  const json ev = json::parse(read_file(path("eval/metrics.json")));
  EXPECT_EQ(ev.at("mae_x100"), seed.at("test").at("mae_x100"));
  EXPECT_EQ(ev.at("corr"), seed.at("test").at("corr"));
  const auto preds = read_lines(path("eval/predictions.jsonl"));
  EXPECT_EQ(preds.size(), read_lines(path("data/test.jsonl")).size());
  const json first = json::parse(preds.front());
  EXPECT_TRUE(first.contains("id") && first.contains("pred") && first.contains("label"));
}

TEST_F(CliPipeline, EvaluateRefusesMismatchedConfig) {
  const Result r = swrm({"evaluate", "--config", config(), "--checkpoint",
                         path("run/seed_1111/checkpoint.json").string(), "--ablate", "attention",
                         "--out", path("eval_bad").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("config"), std::string::npos) << r.err;
}

TEST_F(CliPipeline, InspectAttentionDumpsTraces) {
  const Result r = swrm({"inspect-attention", "--config", config(), "--checkpoint",
                         path("run/seed_1112/checkpoint.json").string(), "--out",
                         path("inspect").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto lines = read_lines(path("inspect/attention.jsonl"));
  ASSERT_FALSE(lines.empty());
  bool saw_weights = false;
  for (const auto& line : lines) {
    const json j = json::parse(line);
    ASSERT_TRUE(j.contains("detection"));
    ASSERT_EQ(j.at("traces").size(), 1u);
    const json& t = j.at("traces")[0];
    EXPECT_EQ(t.at("position"), j.at("detection").at("s"));
    double sum = 0.0;
    for (const auto& a : t.at("attention")) sum += a.at("weight").get<double>();
    if (!t.at("attention").empty()) {
      saw_weights = true;
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
  }
  EXPECT_TRUE(saw_weights);
}

TEST_F(CliPipeline, CorruptThenAnalyze) {
  const Result c = swrm({"corrupt", "--config", config(), "--dataset",
                         path("data/train.jsonl").string(), "--rate", "0.5", "--out",
                         path("corrupt").string()});
  ASSERT_EQ(c.code, 0) << c.err;
  const auto log = read_lines(path("corrupt/corruption_log.jsonl"));
  EXPECT_FALSE(log.empty());
  for (const auto& line : log) {
    const json j = json::parse(line);
    EXPECT_TRUE(j.contains("id") && j.contains("original") && j.contains("position") &&
                j.contains("replacement"));
  }
  const Result a = swrm({"analyze", "--config", config(), "--dataset",
                         path("corrupt/corrupted.jsonl").string(), "--out",
                         path("analysis").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const json rep = json::parse(read_file(path("analysis/analysis.json")));
  EXPECT_EQ(rep.at("substitution_errors").get<std::size_t>(), log.size());
  EXPECT_GT(rep.at("wer").get<double>(), 0.0);
  const auto det = read_lines(path("analysis/detections.jsonl"));
  ASSERT_FALSE(det.empty());
  const json d = json::parse(det.front());
  for (const char* key : {"id", "s", "p", "k", "counts", "top_candidates"}) {
    EXPECT_TRUE(d.contains(key)) << key;
  }
}

TEST_F(CliPipeline, AnalyzeCleanCorpusIsZero) {
  const Result a = swrm({"analyze", "--config", config(), "--dataset",
                         path("data/valid.jsonl").string(), "--out", path("clean").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  const json rep = json::parse(read_file(path("clean/analysis.json")));
  EXPECT_EQ(rep.at("substitution_error_rate").get<double>(), 0.0);
  EXPECT_EQ(rep.at("wer").get<double>(), 0.0);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(swrm({}).code, 2);
  EXPECT_EQ(swrm({"fly"}).code, 2);
  EXPECT_EQ(swrm({"train", "--ablate", "everything"}).code, 2);
  EXPECT_EQ(swrm({"corrupt", "--rate", "1.5"}).code, 2);
  TempDir dir;
  // Missing dataset is a configuration problem.
  const Result r = swrm({"corrupt", "--out", dir.path().string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, HelpExitsCleanly) {
  const Result r = swrm({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("inspect-attention"), std::string::npos);
}

}  // namespace
}  // namespace swrm
