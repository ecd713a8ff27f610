#ifndef SWRM_TRAINER_H_
#define SWRM_TRAINER_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "swrm/eval.h"
#include "swrm/fusion.h"
#include "swrm/model.h"

namespace swrm {

struct TrainConfig {
  std::string optimizer = "adam";
  double learning_rate = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 64;
  std::vector<std::uint64_t> seeds = {1111, 1112, 1113, 1114, 1115};
  std::size_t epochs = 100;
  // Epochs without validation improvement before stopping; 0 disables.
  std::size_t patience = 8;
};

// Throws ConfigError for a non-positive learning rate, batch size or epoch
// count, or an unknown optimizer.
void validate_train_config(const TrainConfig& config);

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_mae = 0.0;
  double lr = 0.0;
};

std::string epoch_log_to_json(const EpochLog& log);
EpochLog epoch_log_from_json(const std::string& line);

// Adaptive-moment optimizer over every parameter of a model.
class Adam {
 public:
  Adam(double lr, double beta1, double beta2, double epsilon);

  // Applies one update from each parameter's accumulated grad.
  void step(SwrmModel& model);
  double learning_rate() const { return lr_; }
  std::size_t steps() const { return t_; }

 private:
  struct Moments {
    Matrix m;
    Matrix v;
  };
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
  std::unordered_map<std::string, Moments> moments_;
};

// Accumulates, into each parameter's grad, the gradient of the mean
// multitask loss over `batch`. Returns that loss. Throws DivergenceError
// naming the first non-finite tensor role when the loss is not finite.
double accumulate_batch_gradients(SwrmModel& model, std::span<const PreparedSample* const> batch,
                                  const PseudoLabelGenerator& generator);

void zero_grads(SwrmModel& model);

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_valid_mae = 0.0;
  MetricsReport valid_metrics;
  SwrmModel model;  // restored to the best validation epoch
};

struct TrainHooks {
  // Called after every epoch.
  std::function<void(std::uint64_t seed, const EpochLog&)> on_epoch;
};

// Trains one model. Sample order and initialization derive from `seed`.
SeedResult train_seed(const std::vector<PreparedSample>& train,
                      const std::vector<PreparedSample>& valid, const ModelConfig& model_config,
                      const TrainConfig& config, std::uint64_t seed,
                      const PseudoLabelGenerator& generator, const TrainHooks& hooks = {});

struct TrainResult {
  std::vector<SeedResult> runs;
  MetricsReport mean_valid;
};

// Prepares both splits once, then trains one model per configured seed.
TrainResult train(const DatasetSplit& train_split, const DatasetSplit& valid_split,
                  const LmAdapter& lm, const SentimentLexicon& lexicon,
                  const ModelConfig& model_config, const TrainConfig& config,
                  const PseudoLabelGenerator& generator, const TrainHooks& hooks = {});

// p_f for every sample.
std::vector<double> predict_split(const SwrmModel& model,
                                  const std::vector<PreparedSample>& samples);
MetricsReport evaluate_split(const SwrmModel& model, const std::vector<PreparedSample>& samples);

}  // namespace swrm

#endif  // SWRM_TRAINER_H_
