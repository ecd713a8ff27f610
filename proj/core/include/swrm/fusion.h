#ifndef SWRM_FUSION_H_
#define SWRM_FUSION_H_

// Fusion of the refined text with raw visual and acoustic streams, the
// sentiment regressor and the unimodal auxiliary heads.

#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "swrm/autograd.h"
#include "swrm/encoders.h"

namespace swrm {

// Which recurrent output step represents a visual/acoustic stream.
enum class Pooling { kFirst, kLast };

std::string_view to_string(Pooling pooling);
Pooling parse_pooling(std::string_view text);

struct FusionDims {
  Eigen::Index d_x = 0;  // text encoder width
  Eigen::Index visual_in = 0;
  Eigen::Index acoustic_in = 0;
  Eigen::Index d_v_l = 0;
  Eigen::Index d_v_v = 0;
  Eigen::Index d_v_a = 0;
  Eigen::Index d_v_f = 0;
};

struct FusionParams {
  Linear text_proj;  // text encoder start slot -> d_v_l
  Lstm visual;       // raw visual frames -> d_v_v
  Lstm acoustic;     // raw acoustic frames -> d_v_a
  Linear fusion;     // W4, b4
  Linear output;     // W5, b5
  Linear head_l;
  Linear head_v;
  Linear head_a;

  FusionParams() = default;
  FusionParams(const FusionDims& dims, Rng& rng);

  void visit(const std::string& prefix, const ParamVisitor& fn);
  void visit(const std::string& prefix, const ConstParamVisitor& fn) const;
};

struct FusionOutput {
  RowVector v_f;
  RowVector v_l;
  RowVector v_v;
  RowVector v_a;
};

// v_f = relu(W4 [v_l; v_v; v_a] + b4). Throws ConfigError on width
// mismatches.
FusionOutput fuse(const TextEncoder& text, const Matrix& z_l, const Matrix& x_v,
                  const Matrix& x_a, const FusionParams& params,
                  Pooling pooling = Pooling::kFirst);

// p_f = W5 v_f + b5, unclamped.
double predict(const RowVector& v_f, const FusionParams& params);

struct Prediction {
  double p_f = 0.0;
  double p_l = 0.0;
  double p_v = 0.0;
  double p_a = 0.0;
};

Prediction predict_all(const FusionOutput& reps, const FusionParams& params);

struct UnimodalLabels {
  double l = 0.0;
  double v = 0.0;
  double a = 0.0;
};

struct TaskWeights {
  double l = 1.0;
  double v = 1.0;
  double a = 1.0;
};

// |p_f - label| + sum_m w_m |p_m - y_m|. Throws std::invalid_argument for a
// negative weight.
double multitask_loss(const Prediction& pred, double label, const UnimodalLabels& unimodal,
                      const TaskWeights& weights);

// Mean of the per-sample losses.
double multitask_loss(std::span<const Prediction> preds, std::span<const double> labels,
                      std::span<const UnimodalLabels> unimodal, const TaskWeights& weights);

// Source of per-modality training targets.
class PseudoLabelGenerator {
 public:
  virtual ~PseudoLabelGenerator() = default;
  virtual UnimodalLabels generate(double label, const FusionOutput& reps) const = 0;
  virtual std::string name() const = 0;
};

// Default: every modality gets the multimodal label.
class CopyLabelGenerator final : public PseudoLabelGenerator {
 public:
  UnimodalLabels generate(double label, const FusionOutput&) const override {
    return {label, label, label};
  }
  std::string name() const override { return "copy"; }
};

class ConstantLabelGenerator final : public PseudoLabelGenerator {
 public:
  explicit ConstantLabelGenerator(double value) : value_(value) {}
  UnimodalLabels generate(double, const FusionOutput&) const override {
    return {value_, value_, value_};
  }
  std::string name() const override { return "constant"; }

 private:
  double value_;
};

// Runs the generator and clamps each label to [-3, 3], logging a warning
// when clamping happens.
UnimodalLabels generate_unimodal_labels(double label, const FusionOutput& reps,
                                        const PseudoLabelGenerator& generator);

namespace graph {

struct FusionVars {
  Var v_f;
  Var v_l;
  Var v_v;
  Var v_a;
};

FusionVars fuse(Tape& tape, const TextEncoder& text, const Var& z_l, const Var& x_v,
                const Var& x_a, const FusionParams& params, Pooling pooling);

struct PredictionVars {
  Var p_f;
  Var p_l;
  Var p_v;
  Var p_a;
};

PredictionVars predict(Tape& tape, const FusionVars& reps, const FusionParams& params);

// 1x1 loss for one sample.
Var multitask_loss(Tape& tape, const PredictionVars& pred, double label,
                   const UnimodalLabels& unimodal, const TaskWeights& weights);

}  // namespace graph
}  // namespace swrm

#endif  // SWRM_FUSION_H_
