#ifndef SWRM_MODEL_H_
#define SWRM_MODEL_H_

// The complete pipeline: detection output and embeddings in, refinement,
// fusion and prediction out.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "swrm/corpus.h"
#include "swrm/detector.h"
#include "swrm/fusion.h"
#include "swrm/lexicon.h"
#include "swrm/lm_adapter.h"
#include "swrm/refiner.h"

namespace swrm {

struct ModelConfig {
  Eigen::Index d_x = 768;  // must equal the adapter's embedding width
  Eigen::Index visual_dim = 0;
  Eigen::Index acoustic_dim = 0;
  Eigen::Index ffn_dim = 0;  // 0 means 2 * d_x
  Eigen::Index d_h_v = 16;
  Eigen::Index d_h_a = 32;
  Eigen::Index d_h_va = 48;
  Eigen::Index d_v_l = 32;
  Eigen::Index d_v_a = 16;
  Eigen::Index d_v_v = 32;
  Eigen::Index d_v_f = 128;
  std::size_t k = 50;
  Pooling pooling = Pooling::kFirst;
  Ablations ablations;
  TaskWeights task_weights;

  Eigen::Index effective_ffn_dim() const { return ffn_dim > 0 ? ffn_dim : 2 * d_x; }
  RefinerDims refiner_dims() const { return {d_x, d_x, d_h_v, d_h_a, d_h_va}; }
  FusionDims fusion_dims() const {
    return {d_x, visual_dim, acoustic_dim, d_v_l, d_v_v, d_v_a, d_v_f};
  }
};

// Hidden sizes for the three ASR transcript variants: "mosi-speechbrain",
// "mosi-ibm", "mosi-iflytek". Feature widths are left at 0.
ModelConfig preset_config(std::string_view name);
// Recommended batch size for a preset.
std::size_t preset_batch_size(std::string_view name);

// Throws ConfigError when a size is non-positive.
void validate_model_config(const ModelConfig& config);

// Canonical JSON (sorted keys, no whitespace) of every field that affects
// parameter shapes or the forward pass.
std::string model_config_to_json(const ModelConfig& config);
ModelConfig model_config_from_json(std::string_view json_text);
// Lower-case hex FNV-1a 64 of model_config_to_json().
std::string config_hash(const ModelConfig& config);

// Everything the forward pass needs from the data and the LM, computed once.
struct PreparedSample {
  std::string id;
  double label = 0.0;
  Matrix x_l;  // n_l x d_x input embeddings
  Matrix u_v;  // pseudo-aligned visual, n_l rows
  Matrix u_a;  // pseudo-aligned acoustic, n_l rows
  Matrix x_v;  // raw visual frames
  Matrix x_a;  // raw acoustic frames
  DetectionResult detection;
  Matrix candidate_embeddings;  // k x d_x, empty when detection is skipped
  RowVector mask_embedding;
};

// Runs detection (skipped under no_position) and embeds candidates.
PreparedSample prepare_sample(const Utterance& u, const LmAdapter& lm,
                              const SentimentLexicon& lexicon, const ModelConfig& config);
std::vector<PreparedSample> prepare_split(const DatasetSplit& split, const LmAdapter& lm,
                                          const SentimentLexicon& lexicon,
                                          const ModelConfig& config);

class SwrmModel {
 public:
  SwrmModel() = default;
  SwrmModel(const ModelConfig& config, std::uint64_t seed);

  struct ForwardVars {
    graph::RefineVars refine;
    graph::FusionVars fusion;
    graph::PredictionVars prediction;
  };

  // refine = false feeds x_l straight into fusion (no-refinement baseline).
  ForwardVars forward(Tape& tape, const PreparedSample& sample, bool refine = true) const;

  Prediction predict(const PreparedSample& sample) const;
  Prediction predict_baseline(const PreparedSample& sample) const;
  RefinementResult refine(const PreparedSample& sample) const;

  const ModelConfig& config() const { return config_; }

  void visit(const ParamVisitor& fn);
  void visit(const ConstParamVisitor& fn) const;
  std::size_t parameter_count() const;

 private:
  graph::StatesVars states(Tape& tape, const PreparedSample& sample, const Var& x_l) const;

  ModelConfig config_;
  TextEncoder text_;
  ContextEncoders contexts_;
  RefinerParams refiner_;
  FusionParams fusion_;
};

}  // namespace swrm

#endif  // SWRM_MODEL_H_
