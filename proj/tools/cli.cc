#include "cli.h"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>

#include "run_config.h"
#include "swrm/checkpoint.h"
#include "swrm/errors.h"
#include "swrm/eval.h"
#include "swrm/hashing.h"
#include "swrm/synthetic.h"

namespace swrm::cli {
namespace {

using ojson = nlohmann::ordered_json;

// Values given on the command line; unset ones leave the config alone.
struct Flags {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::vector<std::string> ablate;
  std::optional<std::string> adapter;
  std::optional<std::string> out;

  std::optional<std::string> dataset, train, valid, test, checkpoint, predictions;
  std::optional<std::string> mock_config, lm_cache, preset, policy;
  std::vector<std::string> lexicons;
  std::vector<std::uint64_t> seeds;
  std::optional<double> rate, lr;
  std::optional<std::size_t> epochs, batch_size, patience, utterances;
};

RunConfig resolve(const Flags& f) {
  RunConfig c;
  if (f.config) apply_config_file(c, *f.config);
  auto path = [](const std::optional<std::string>& s, std::optional<fs::path>& field) {
    if (s) field = fs::path(*s);
  };
  path(f.dataset, c.dataset);
  path(f.train, c.train);
  path(f.valid, c.valid);
  path(f.test, c.test);
  path(f.checkpoint, c.checkpoint);
  path(f.predictions, c.predictions);
  path(f.mock_config, c.mock_config);
  path(f.lm_cache, c.lm_cache);
  path(f.out, c.out);
  if (!f.lexicons.empty()) c.lexicons.assign(f.lexicons.begin(), f.lexicons.end());
  if (f.preset) {
    const std::size_t k = c.model.k;
    const Ablations ab = c.model.ablations;
    c.model = preset_config(*f.preset);
    c.model.k = k;
    c.model.ablations = ab;
    c.preset = *f.preset;
    c.training.batch_size = preset_batch_size(*f.preset);
  }
  if (f.adapter) c.adapter = *f.adapter;
  if (f.k) c.model.k = *f.k;
  if (f.seed) {
    c.seed = *f.seed;
    c.seed_set = true;
  }
  if (!f.ablate.empty()) {
    c.model.ablations = {};
    for (const auto& a : f.ablate) apply_ablation(c.model.ablations, a);
  }
  if (f.policy) c.policy = parse_substitution_policy(*f.policy);
  if (f.rate) c.corruption_rate = *f.rate;
  if (f.lr) c.training.learning_rate = *f.lr;
  if (f.epochs) c.training.epochs = *f.epochs;
  if (f.batch_size) c.training.batch_size = *f.batch_size;
  if (f.patience) c.training.patience = *f.patience;
  if (!f.seeds.empty()) c.training.seeds = f.seeds;
  if (f.utterances) c.synth_utterances = *f.utterances;
  // --seed alone trains a single model; an explicit --seeds list wins.
  if (c.seed_set && f.seeds.empty()) c.training.seeds = {c.seed};
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
}

void write_effective_config(const fs::path& dir, const RunConfig& c) {
  write_text(dir / "effective_config.json", to_json(c));
}

ojson metrics_json(const MetricsReport& m) { return ojson::parse(metrics_to_json(m)); }

ojson vector_json(const RowVector& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

ojson detection_json(const std::string& id, const DetectionResult& d,
                     const SentimentLexicon& lexicon) {
  ojson j;
  j["id"] = id;
  j["s"] = d.position;
  j["p"] = d.gate_mask;
  j["k"] = d.k;
  j["counts"] = d.counts;
  const CandidateFilter f = candidate_filter(d.candidate_set, lexicon);
  ojson cands = ojson::array();
  for (std::size_t i = 0; i < d.candidate_set.size(); ++i) {
    const Candidate& c = d.candidate_set.candidates[i];
    cands.push_back({c.token, c.probability, static_cast<bool>(f.flags[i])});
  }
  j["top_candidates"] = std::move(cands);
  return j;
}

// ---------------------------------------------------------------------------

int cmd_corrupt(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  const DatasetSplit split = load_dataset(require_path(c.dataset, "dataset"), SplitName::kTrain);
  const SentimentLexicon lexicon = load_configured_lexicon(c);
  const CorruptionResult res = corrupt_sentiment_words(
      split, lexicon, {c.corruption_rate, c.policy}, derive_seed(c.seed, "corrupt"));
  save_dataset(dir / "corrupted.jsonl", res.split);
  save_corruption_log(dir / "corruption_log.jsonl", res.log);
  write_effective_config(dir, c);
  out << "corrupted " << res.log.size() << " of " << split.size() << " utterances ("
      << to_string(c.policy) << ", rate " << c.corruption_rate << ")\n"
      << "wrote " << (dir / "corrupted.jsonl").string() << "\n";
  return kOk;
}

std::map<std::string, double> load_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read predictions " + path.string());
  std::map<std::string, double> preds;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      preds[j.at("id").get<std::string>()] = j.at("pred").get<double>();
    } catch (const nlohmann::json::exception& e) {
      throw LoadError(n, "predictions line " + std::to_string(n) + ": " + e.what());
    }
  }
  return preds;
}

int cmd_analyze(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  DatasetSplit split = load_dataset(require_path(c.dataset, "dataset"), SplitName::kTest);
  const SentimentLexicon lexicon = load_configured_lexicon(c);

  std::size_t missing_gold = 0;
  for (Utterance& u : split.utterances) {
    if (!u.gold_tokens) {
      u.gold_tokens = u.tokens;
      ++missing_gold;
    }
  }
  const std::vector<bool> flags = substitution_error_flags(split, lexicon);
  std::size_t errors = 0, gold_words = 0, with_error = 0;
  double wer_sum = 0.0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const Utterance& u = split.utterances[i];
    errors += count_edits(*u.gold_tokens, u.tokens).errors();
    gold_words += u.gold_tokens->size();
    wer_sum += wer(*u.gold_tokens, u.tokens);
    with_error += flags[i] ? 1 : 0;
  }

  ojson report;
  report["utterances"] = split.size();
  report["missing_gold_tokens"] = missing_gold;
  report["substitution_errors"] = with_error;
  report["substitution_error_rate"] =
      static_cast<double>(with_error) / static_cast<double>(split.size());
  report["wer"] = static_cast<double>(errors) / static_cast<double>(gold_words);
  report["mean_utterance_wer"] = wer_sum / static_cast<double>(split.size());

  if (c.predictions) {
    const auto preds_by_id = load_predictions(require_path(c.predictions, "predictions"));
    std::vector<double> preds, labels;
    std::vector<bool> strata;
    for (std::size_t i = 0; i < split.size(); ++i) {
      const auto it = preds_by_id.find(split.utterances[i].id);
      if (it == preds_by_id.end()) {
        throw ConfigError("no prediction for utterance '" + split.utterances[i].id + "'");
      }
      preds.push_back(it->second);
      labels.push_back(split.utterances[i].label);
      strata.push_back(flags[i]);
    }
    const StratifiedRates r = stratified_misclassification(preds, labels, strata);
    report["misclassification_with_error"] =
        r.with_error ? ojson(*r.with_error) : ojson(nullptr);
    report["misclassification_without_error"] =
        r.without_error ? ojson(*r.without_error) : ojson(nullptr);
  }

  if (!c.adapter.empty()) {
    const auto lm = make_adapter(c);
    std::ofstream det(dir / "detections.jsonl");
    for (const Utterance& u : split.utterances) {
      det << detection_json(u.id, detect(u.tokens, *lm, lexicon, c.model.k), lexicon).dump() << '\n';
    }
  }

  write_text(dir / "analysis.json", report.dump(2));
  write_effective_config(dir, c);
  out << "utterances: " << split.size();
  if (missing_gold > 0) out << " (" << missing_gold << " without gold_tokens, treated as exact)";
  out << "\nsentiment substitution error rate: " << report["substitution_error_rate"].get<double>()
      << "\nWER: " << report["wer"].get<double>() << "\n";
  return kOk;
}

int cmd_train(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  const DatasetSplit train_split = load_dataset(require_path(c.train, "train"), SplitName::kTrain);
  const DatasetSplit valid_split = load_dataset(require_path(c.valid, "valid"), SplitName::kValid);
  std::optional<DatasetSplit> test_split;
  if (c.test) test_split = load_dataset(require_path(c.test, "test"), SplitName::kTest);
  const SentimentLexicon lexicon = load_configured_lexicon(c);
  const auto lm = make_adapter(c);
  const ModelConfig mc = resolve_model_config(c, *lm, train_split);
  validate_train_config(c.training);
  write_effective_config(dir, c);

  const auto train_set = prepare_split(train_split, *lm, lexicon, mc);
  const auto valid_set = prepare_split(valid_split, *lm, lexicon, mc);
  std::optional<std::vector<PreparedSample>> test_set;
  if (test_split) test_set = prepare_split(*test_split, *lm, lexicon, mc);

  const CopyLabelGenerator generator;
  std::vector<MetricsReport> valid_reports, test_reports;
  std::vector<NamedReport> rows;
  for (std::uint64_t seed : c.training.seeds) {
    const fs::path seed_dir = dir / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    std::ofstream log(seed_dir / "train_log.jsonl");
    TrainHooks hooks;
    hooks.on_epoch = [&log](std::uint64_t, const EpochLog& e) {
      log << epoch_log_to_json(e) << '\n';
    };
    const SeedResult res =
        train_seed(train_set, valid_set, mc, c.training, seed, generator, hooks);
    save_checkpoint(seed_dir / "checkpoint.json", res.model, seed, lm->describe());

    ojson m;
    m["seed"] = seed;
    m["best_epoch"] = res.best_epoch;
    m["epochs_run"] = res.log.size();
    m["valid"] = metrics_json(res.valid_metrics);
    valid_reports.push_back(res.valid_metrics);
    const MetricsReport& shown = test_set ? test_reports.emplace_back(evaluate_split(res.model, *test_set))
                                          : res.valid_metrics;
    if (test_set) m["test"] = metrics_json(shown);
    write_text(seed_dir / "metrics.json", m.dump(2));
    rows.push_back({"seed " + std::to_string(seed), shown});
    out << "seed " << seed << ": best epoch " << res.best_epoch << ", valid MAE "
        << res.best_valid_mae << "\n";
  }

  ojson mean;
  mean["seeds"] = c.training.seeds;
  mean["valid"] = metrics_json(average(valid_reports));
  if (test_set) mean["test"] = metrics_json(average(test_reports));
  write_text(dir / "metrics_mean.json", mean.dump(2));
  rows.push_back({"mean", test_set ? average(test_reports) : average(valid_reports)});
  const std::string table = format_metrics_table(rows);
  write_text(dir / "report.txt", table);
  out << (test_set ? "test" : "valid") << " metrics\n" << table;
  return kOk;
}

struct LoadedEval {
  DatasetSplit split;
  SentimentLexicon lexicon;
  std::unique_ptr<LmAdapter> lm;
  ModelConfig config;
  Checkpoint checkpoint;
};

LoadedEval load_for_eval(const RunConfig& c) {
  LoadedEval e;
  const std::optional<fs::path>& data = c.test ? c.test : c.dataset;
  e.split = load_dataset(require_path(data, "test or dataset"), SplitName::kTest);
  e.lexicon = load_configured_lexicon(c);
  e.lm = make_adapter(c);
  e.config = resolve_model_config(c, *e.lm, e.split);
  e.checkpoint = load_checkpoint(require_path(c.checkpoint, "checkpoint"), e.config);
  return e;
}

int cmd_evaluate(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  LoadedEval e = load_for_eval(c);
  const auto samples = prepare_split(e.split, *e.lm, e.lexicon, e.config);
  const std::vector<double> preds = predict_split(e.checkpoint.model, samples);
  std::vector<double> labels;
  std::ofstream pred_out(dir / "predictions.jsonl");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    labels.push_back(samples[i].label);
    ojson p;
    p["id"] = samples[i].id;
    p["pred"] = preds[i];
    p["label"] = samples[i].label;
    pred_out << p.dump() << '\n';
  }
  const MetricsReport report = compute_metrics(preds, labels);
  write_text(dir / "metrics.json", metrics_to_json(report));
  const NamedReport row{"seed " + std::to_string(e.checkpoint.seed), report};
  const std::string table = format_metrics_table(std::span<const NamedReport>(&row, 1));
  write_text(dir / "report.txt", table);
  write_effective_config(dir, c);
  out << table;
  return kOk;
}

int cmd_inspect(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  LoadedEval e = load_for_eval(c);
  std::ofstream traces(dir / "attention.jsonl");
  for (const Utterance& u : e.split.utterances) {
    const PreparedSample s = prepare_sample(u, *e.lm, e.lexicon, e.config);
    const RefinementResult r = e.checkpoint.model.refine(s);
    ojson j;
    j["id"] = u.id;
    j["tokens"] = u.tokens;
    if (!e.config.ablations.no_position) j["detection"] = detection_json(u.id, s.detection, e.lexicon);
    ojson list = ojson::array();
    for (const RefinementTrace& t : r.traces) {
      ojson tj;
      tj["position"] = t.position;
      tj["token"] = u.tokens[t.position];
      tj["gate_mask"] = t.gate_mask;
      tj["g_v"] = t.g_v;
      ojson att = ojson::array();
      for (std::size_t i = 0; i < t.candidates.size(); ++i) {
        att.push_back({{"token", t.candidates[i]},
                       {"weight", t.attention_weights(static_cast<Eigen::Index>(i))}});
      }
      tj["attention"] = std::move(att);
      tj["g_mask"] = t.g_mask ? ojson(*t.g_mask) : ojson(nullptr);
      tj["r_e"] = t.r_e ? vector_json(*t.r_e) : ojson(nullptr);
      tj["r_add"] = vector_json(t.r_add);
      tj["r_v"] = vector_json(t.r_v);
      tj["r_l"] = vector_json(t.r_l);
      list.push_back(std::move(tj));
    }
    j["traces"] = std::move(list);
    traces << j.dump() << '\n';
  }
  write_effective_config(dir, c);
  out << "wrote " << e.split.size() << " traces to " << (dir / "attention.jsonl").string()
      << "\n";
  return kOk;
}

int cmd_synth(const RunConfig& c, std::ostream& out) {
  const fs::path dir = require_out(c);
  SyntheticSpec spec;
  spec.utterances = c.synth_utterances;
  spec.seed = c.seed;
  const SyntheticCorpus corpus = make_synthetic_corpus(spec);

  // 60/20/20 split in generation order.
  const std::size_t n = corpus.split.size();
  const std::size_t n_train = n * 6 / 10, n_valid = n * 2 / 10;
  auto slice = [&](SplitName name, std::size_t from, std::size_t to) {
    DatasetSplit s;
    s.name = name;
    s.utterances.assign(corpus.split.utterances.begin() + static_cast<std::ptrdiff_t>(from),
                        corpus.split.utterances.begin() + static_cast<std::ptrdiff_t>(to));
    return s;
  };
  const DatasetSplit train = slice(SplitName::kTrain, 0, n_train);
  const DatasetSplit valid = slice(SplitName::kValid, n_train, n_train + n_valid);
  const DatasetSplit test = slice(SplitName::kTest, n_train + n_valid, n);
  if (train.empty() || valid.empty() || test.empty()) {
    throw ConfigError("synth needs at least 5 utterances");
  }
  save_dataset(dir / "train.jsonl", train);
  save_dataset(dir / "valid.jsonl", valid);
  save_dataset(dir / "test.jsonl", test);
  save_lexicon(dir / "lexicon.tsv", corpus.lexicon);
  save_mock_lm_config(dir / "mock_lm.json", corpus.lm);

  RunConfig run;
  run.train = dir / "train.jsonl";
  run.valid = dir / "valid.jsonl";
  run.test = dir / "test.jsonl";
  run.dataset = dir / "test.jsonl";
  run.lexicons = {dir / "lexicon.tsv"};
  run.adapter = "mock";
  run.mock_config = dir / "mock_lm.json";
  run.model.k = 10;
  run.model.d_h_v = 8;
  run.model.d_h_a = 8;
  run.model.d_h_va = 8;
  run.model.d_v_l = 8;
  run.model.d_v_a = 8;
  run.model.d_v_v = 8;
  run.model.d_v_f = 16;
  run.training.learning_rate = 3e-3;
  run.training.batch_size = 16;
  run.training.epochs = 60;
  run.seed = c.seed;
  run.synth_utterances = c.synth_utterances;
  write_text(dir / "config.json", to_json(run));
  out << "wrote synthetic corpus (" << train.size() << "/" << valid.size() << "/" << test.size()
      << " utterances) and config.json to " << dir.string() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sentiment word aware multimodal refinement toolkit"};
  app.require_subcommand(1);
  Flags f;

  app.add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Root seed (replaces the training seed list)");
  app.add_option("--k", f.k, "Candidates per masked position")->check(CLI::PositiveNumber);
  app.add_option("--ablate", f.ablate, "Disable a component (repeatable)")
      ->check(CLI::IsMember({"position", "attention", "multimodal"}))
      ->take_all();
  app.add_option("--adapter", f.adapter, "Masked LM adapter")
      ->check(CLI::IsMember({"real", "mock"}));
  app.add_option("--out", f.out, "Output directory");

  app.add_option("--dataset", f.dataset, "Dataset (JSON Lines)");
  app.add_option("--train", f.train, "Training split");
  app.add_option("--valid", f.valid, "Validation split");
  app.add_option("--test", f.test, "Test split");
  app.add_option("--lexicon", f.lexicons, "Lexicon file (repeatable)")->take_all();
  app.add_option("--mock-config", f.mock_config, "Mock LM configuration");
  app.add_option("--lm-cache", f.lm_cache, "Exported LM cache directory");
  app.add_option("--checkpoint", f.checkpoint, "Model checkpoint");
  app.add_option("--predictions", f.predictions, "Predictions (JSON Lines id/pred)");
  app.add_option("--preset", f.preset, "Hidden-size preset")
      ->check(CLI::IsMember({"mosi-speechbrain", "mosi-ibm", "mosi-iflytek"}));
  app.add_option("--rate", f.rate, "Corruption rate")->check(CLI::Range(0.0, 1.0));
  app.add_option("--policy", f.policy, "Substitution policy")
      ->check(CLI::IsMember({"phonetic-truncate", "random-vocab"}));
  app.add_option("--lr", f.lr, "Learning rate");
  app.add_option("--epochs", f.epochs, "Maximum epochs");
  app.add_option("--batch-size", f.batch_size, "Batch size");
  app.add_option("--patience", f.patience, "Early-stopping patience (0 disables)");
  app.add_option("--seeds", f.seeds, "Training seeds")->take_all();
  app.add_option("--utterances", f.utterances, "Synthetic corpus size");

  auto add = [&app](const char* name, const char* help) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    return sub;
  };
  CLI::App* corrupt = add("corrupt", "Inject sentiment-word substitutions into a dataset");
  CLI::App* analyze = add("analyze", "Measure substitution-error rate and WER");
  CLI::App* train = add("train", "Train one model per seed and report averaged metrics");
  CLI::App* evaluate = add("evaluate", "Evaluate a checkpoint");
  CLI::App* inspect = add("inspect-attention", "Dump refinement traces as JSON");
  CLI::App* synth = add("synth", "Write a synthetic corpus, lexicon and mock LM");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  try {
    const RunConfig c = resolve(f);
    if (corrupt->parsed()) return cmd_corrupt(c, out);
    if (analyze->parsed()) return cmd_analyze(c, out);
    if (train->parsed()) return cmd_train(c, out);
    if (evaluate->parsed()) return cmd_evaluate(c, out);
    if (inspect->parsed()) return cmd_inspect(c, out);
    if (synth->parsed()) return cmd_synth(c, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace swrm::cli
