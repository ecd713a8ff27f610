#include "swrm/trainer.h"

#include <glog/logging.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_map>

#include "swrm/errors.h"
#include "swrm/hashing.h"

namespace swrm {

void validate_train_config(const TrainConfig& c) {
  if (c.optimizer != "adam") throw ConfigError("unknown optimizer '" + c.optimizer + "'");
  if (!(c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (c.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (c.epochs == 0) throw ConfigError("epochs must be positive");
  if (c.seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0 && c.beta2 >= 0.0 && c.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
}

std::string epoch_log_to_json(const EpochLog& log) {
  nlohmann::ordered_json j;
  j["epoch"] = log.epoch;
  j["train_loss"] = log.train_loss;
  j["valid_mae"] = log.valid_mae;
  j["lr"] = log.lr;
  return j.dump();
}

EpochLog epoch_log_from_json(const std::string& line) {
  try {
    const auto j = nlohmann::json::parse(line);
    return {j.at("epoch").get<std::size_t>(), j.at("train_loss").get<double>(),
            j.at("valid_mae").get<double>(), j.at("lr").get<double>()};
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(0, std::string("training log: ") + e.what());
  }
}

Adam::Adam(double lr, double beta1, double beta2, double epsilon)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  if (lr < 0.0) throw ConfigError("learning rate must be non-negative");
}

void Adam::step(SwrmModel& model) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  model.visit(ParamVisitor([&](const std::string& name, Parameter& p) {
    auto [it, inserted] = moments_.try_emplace(name);
    Moments& mo = it->second;
    if (inserted) {
      mo.m = Matrix::Zero(p.value.rows(), p.value.cols());
      mo.v = Matrix::Zero(p.value.rows(), p.value.cols());
    }
    mo.m = beta1_ * mo.m + (1.0 - beta1_) * p.grad;
    mo.v = beta2_ * mo.v + (1.0 - beta2_) * p.grad.cwiseAbs2();
    if (lr_ == 0.0) return;
    p.value.array() -= lr_ * (mo.m.array() / c1) / ((mo.v.array() / c2).sqrt() + eps_);
  }));
}

void zero_grads(SwrmModel& model) {
  model.visit(ParamVisitor([](const std::string&, Parameter& p) { p.zero_grad(); }));
}

namespace {

std::string first_nonfinite_parameter(const SwrmModel& model) {
  std::string found;
  model.visit(ConstParamVisitor([&found](const std::string& name, const Parameter& p) {
    if (found.empty() && !p.value.allFinite()) found = "parameter " + name;
  }));
  return found;
}

}  // namespace

double accumulate_batch_gradients(SwrmModel& model, std::span<const PreparedSample* const> batch,
                                  const PseudoLabelGenerator& generator) {
  if (batch.empty()) throw std::invalid_argument("accumulate_batch_gradients: empty batch");
  std::unordered_map<const Parameter*, Parameter*> params;
  model.visit(ParamVisitor([&params](const std::string&, Parameter& p) { params[&p] = &p; }));

  const double inv = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const PreparedSample* sample : batch) {
    Tape tape;
    const SwrmModel::ForwardVars f = model.forward(tape, *sample, true);
    const FusionOutput reps{f.fusion.v_f.value().row(0), f.fusion.v_l.value().row(0),
                            f.fusion.v_v.value().row(0), f.fusion.v_a.value().row(0)};
    const UnimodalLabels pseudo = generate_unimodal_labels(sample->label, reps, generator);
    const Var loss = graph::multitask_loss(tape, f.prediction, sample->label, pseudo,
                                           model.config().task_weights);
    tape.label(loss, "loss");
    if (!std::isfinite(loss.scalar())) {
      std::string role = first_nonfinite_parameter(model);
      if (role.empty()) role = tape.first_nonfinite_role();
      if (role.empty()) role = "loss";
      throw DivergenceError(role, "non-finite loss on sample '" + sample->id +
                                      "'; first non-finite tensor: " + role);
    }
    total += loss.scalar();
    tape.backward(ops::scale(loss, inv));
    tape.for_each_parameter_grad([&params](const Parameter& p, const Matrix& g) {
      params.at(&p)->grad += g;
    });
  }
  return total * inv;
}

std::vector<double> predict_split(const SwrmModel& model,
                                  const std::vector<PreparedSample>& samples) {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const PreparedSample& s : samples) out.push_back(model.predict(s).p_f);
  return out;
}

MetricsReport evaluate_split(const SwrmModel& model, const std::vector<PreparedSample>& samples) {
  std::vector<double> labels;
  labels.reserve(samples.size());
  for (const PreparedSample& s : samples) labels.push_back(s.label);
  return compute_metrics(predict_split(model, samples), labels);
}

SeedResult train_seed(const std::vector<PreparedSample>& train,
                      const std::vector<PreparedSample>& valid, const ModelConfig& model_config,
                      const TrainConfig& config, std::uint64_t seed,
                      const PseudoLabelGenerator& generator, const TrainHooks& hooks) {
  validate_train_config(config);
  if (train.empty() || valid.empty()) throw ConfigError("training needs non-empty splits");

  SeedResult result;
  result.seed = seed;
  SwrmModel model(model_config, derive_seed(seed, "model"));
  Adam adam(config.learning_rate, config.beta1, config.beta2, config.epsilon);
  std::mt19937_64 order_rng(derive_seed(seed, "order"));

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  double best = std::numeric_limits<double>::infinity();
  SwrmModel best_model = model;
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), order_rng);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const PreparedSample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      zero_grads(model);
      const double loss = accumulate_batch_gradients(model, batch, generator);
      loss_sum += loss * static_cast<double>(batch.size());
      adam.step(model);
    }

    const std::vector<double> preds = predict_split(model, valid);
    double mae = 0.0;
    for (std::size_t i = 0; i < valid.size(); ++i) mae += std::abs(preds[i] - valid[i].label);
    mae /= static_cast<double>(valid.size());
    if (!std::isfinite(mae)) {
      throw DivergenceError("prediction.p_f", "validation predictions became non-finite");
    }

    const EpochLog entry{epoch, loss_sum / static_cast<double>(train.size()), mae,
                         config.learning_rate};
    result.log.push_back(entry);
    if (hooks.on_epoch) hooks.on_epoch(seed, entry);

    if (mae < best) {
      best = mae;
      best_model = model;
      result.best_epoch = epoch;
      since_best = 0;
    } else if (config.patience > 0 && ++since_best >= config.patience) {
      VLOG(1) << "seed " << seed << ": early stop after epoch " << epoch;
      break;
    }
  }

  result.best_valid_mae = best;
  result.model = std::move(best_model);
  result.valid_metrics = evaluate_split(result.model, valid);
  return result;
}

TrainResult train(const DatasetSplit& train_split, const DatasetSplit& valid_split,
                  const LmAdapter& lm, const SentimentLexicon& lexicon,
                  const ModelConfig& model_config, const TrainConfig& config,
                  const PseudoLabelGenerator& generator, const TrainHooks& hooks) {
  validate_train_config(config);
  validate_model_config(model_config);
  const std::vector<PreparedSample> train_set =
      prepare_split(train_split, lm, lexicon, model_config);
  const std::vector<PreparedSample> valid_set =
      prepare_split(valid_split, lm, lexicon, model_config);

  TrainResult out;
  std::vector<MetricsReport> reports;
  for (std::uint64_t seed : config.seeds) {
    out.runs.push_back(
        train_seed(train_set, valid_set, model_config, config, seed, generator, hooks));
    reports.push_back(out.runs.back().valid_metrics);
  }
  out.mean_valid = average(reports);
  return out;
}

}  // namespace swrm
