#include "swrm/fusion.h"

#include <glog/logging.h>

#include <array>
#include <cmath>
#include <stdexcept>

#include "swrm/errors.h"

namespace swrm {

std::string_view to_string(Pooling pooling) {
  return pooling == Pooling::kFirst ? "first" : "last";
}

Pooling parse_pooling(std::string_view text) {
  if (text == "first") return Pooling::kFirst;
  if (text == "last") return Pooling::kLast;
  throw ConfigError("unknown pooling '" + std::string(text) + "' (expected first or last)");
}

FusionParams::FusionParams(const FusionDims& d, Rng& rng)
    : text_proj(d.d_x, d.d_v_l, rng),
      visual(d.visual_in, d.d_v_v, rng),
      acoustic(d.acoustic_in, d.d_v_a, rng),
      fusion(d.d_v_l + d.d_v_v + d.d_v_a, d.d_v_f, rng),
      output(d.d_v_f, 1, rng),
      head_l(d.d_v_l, 1, rng),
      head_v(d.d_v_v, 1, rng),
      head_a(d.d_v_a, 1, rng) {}

void FusionParams::visit(const std::string& prefix, const ParamVisitor& fn) {
  text_proj.visit(prefix + ".text_proj", fn);
  visual.visit(prefix + ".visual", fn);
  acoustic.visit(prefix + ".acoustic", fn);
  fusion.visit(prefix + ".fusion", fn);
  output.visit(prefix + ".output", fn);
  head_l.visit(prefix + ".head_l", fn);
  head_v.visit(prefix + ".head_v", fn);
  head_a.visit(prefix + ".head_a", fn);
}

void FusionParams::visit(const std::string& prefix, const ConstParamVisitor& fn) const {
  text_proj.visit(prefix + ".text_proj", fn);
  visual.visit(prefix + ".visual", fn);
  acoustic.visit(prefix + ".acoustic", fn);
  fusion.visit(prefix + ".fusion", fn);
  output.visit(prefix + ".output", fn);
  head_l.visit(prefix + ".head_l", fn);
  head_v.visit(prefix + ".head_v", fn);
  head_a.visit(prefix + ".head_a", fn);
}

namespace graph {

namespace {

Var pool(const Var& seq, Pooling pooling) {
  return ops::slice_rows(seq, pooling == Pooling::kFirst ? 0 : seq.rows() - 1, 1);
}

}  // namespace

FusionVars fuse(Tape& tape, const TextEncoder& text, const Var& z_l, const Var& x_v,
                const Var& x_a, const FusionParams& params, Pooling pooling) {
  if (z_l.cols() != text.model_dim() || z_l.cols() != params.text_proj.in_features()) {
    throw ConfigError("fuse: text width does not match the fusion parameters");
  }
  if (x_v.cols() != params.visual.input_size() || x_a.cols() != params.acoustic.input_size()) {
    throw ConfigError("fuse: raw feature width does not match the fusion encoders");
  }
  if (z_l.rows() < 1 || x_v.rows() < 1 || x_a.rows() < 1) {
    throw ConfigError("fuse: empty modality");
  }
  FusionVars out;
  out.v_l = params.text_proj.forward(tape, text.forward(tape, z_l).cls);
  out.v_v = pool(params.visual.forward(tape, x_v), pooling);
  out.v_a = pool(params.acoustic.forward(tape, x_a), pooling);
  const std::array<Var, 3> parts = {out.v_l, out.v_v, out.v_a};
  out.v_f = ops::relu(params.fusion.forward(tape, ops::concat_cols(parts)));
  tape.label(out.v_l, "fusion.v_l");
  tape.label(out.v_v, "fusion.v_v");
  tape.label(out.v_a, "fusion.v_a");
  tape.label(out.v_f, "fusion.v_f");
  return out;
}

PredictionVars predict(Tape& tape, const FusionVars& reps, const FusionParams& params) {
  PredictionVars p;
  p.p_f = params.output.forward(tape, reps.v_f);
  p.p_l = params.head_l.forward(tape, reps.v_l);
  p.p_v = params.head_v.forward(tape, reps.v_v);
  p.p_a = params.head_a.forward(tape, reps.v_a);
  tape.label(p.p_f, "prediction.p_f");
  return p;
}

Var multitask_loss(Tape& tape, const PredictionVars& pred, double label,
                   const UnimodalLabels& unimodal, const TaskWeights& weights) {
  if (weights.l < 0 || weights.v < 0 || weights.a < 0) {
    throw std::invalid_argument("multitask_loss: negative task weight");
  }
  auto term = [&tape](const Var& p, double y) {
    return ops::abs(ops::sub(p, tape.constant(Matrix::Constant(1, 1, y))));
  };
  Var loss = term(pred.p_f, label);
  loss = ops::add(loss, ops::scale(term(pred.p_l, unimodal.l), weights.l));
  loss = ops::add(loss, ops::scale(term(pred.p_v, unimodal.v), weights.v));
  loss = ops::add(loss, ops::scale(term(pred.p_a, unimodal.a), weights.a));
  return loss;
}

}  // namespace graph

FusionOutput fuse(const TextEncoder& text, const Matrix& z_l, const Matrix& x_v,
                  const Matrix& x_a, const FusionParams& params, Pooling pooling) {
  Tape tape;
  const graph::FusionVars f = graph::fuse(tape, text, tape.constant(z_l), tape.constant(x_v),
                                          tape.constant(x_a), params, pooling);
  return {f.v_f.value().row(0), f.v_l.value().row(0), f.v_v.value().row(0),
          f.v_a.value().row(0)};
}

double predict(const RowVector& v_f, const FusionParams& params) {
  if (v_f.size() != params.output.in_features()) {
    throw ConfigError("predict: fused vector width does not match W5");
  }
  Tape tape;
  return params.output.forward(tape, tape.constant(v_f)).scalar();
}

Prediction predict_all(const FusionOutput& reps, const FusionParams& params) {
  Tape tape;
  const graph::FusionVars f{tape.constant(reps.v_f), tape.constant(reps.v_l),
                            tape.constant(reps.v_v), tape.constant(reps.v_a)};
  const graph::PredictionVars p = graph::predict(tape, f, params);
  return {p.p_f.scalar(), p.p_l.scalar(), p.p_v.scalar(), p.p_a.scalar()};
}

double multitask_loss(const Prediction& pred, double label, const UnimodalLabels& unimodal,
                      const TaskWeights& weights) {
  if (weights.l < 0 || weights.v < 0 || weights.a < 0) {
    throw std::invalid_argument("multitask_loss: negative task weight");
  }
  return std::abs(pred.p_f - label) + weights.l * std::abs(pred.p_l - unimodal.l) +
         weights.v * std::abs(pred.p_v - unimodal.v) +
         weights.a * std::abs(pred.p_a - unimodal.a);
}

double multitask_loss(std::span<const Prediction> preds, std::span<const double> labels,
                      std::span<const UnimodalLabels> unimodal, const TaskWeights& weights) {
  if (preds.size() != labels.size() || preds.size() != unimodal.size()) {
    throw std::invalid_argument("multitask_loss: batch size mismatch");
  }
  if (preds.empty()) throw std::invalid_argument("multitask_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    total += multitask_loss(preds[i], labels[i], unimodal[i], weights);
  }
  return total / static_cast<double>(preds.size());
}

UnimodalLabels generate_unimodal_labels(double label, const FusionOutput& reps,
                                        const PseudoLabelGenerator& generator) {
  UnimodalLabels out = generator.generate(label, reps);
  auto clamp = [&generator](double& y, const char* modality) {
    if (std::isnan(y)) throw std::invalid_argument("pseudo label is NaN");
    if (y > 3.0 || y < -3.0) {
      LOG(WARNING) << "pseudo label generator '" << generator.name() << "' produced " << y
                   << " for modality " << modality << "; clamped to [-3, 3]";
      y = y > 3.0 ? 3.0 : -3.0;
    }
  };
  clamp(out.l, "l");
  clamp(out.v, "v");
  clamp(out.a, "a");
  return out;
}

}  // namespace swrm
