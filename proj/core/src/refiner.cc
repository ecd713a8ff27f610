#include "swrm/refiner.h"

#include <array>

#include "swrm/errors.h"

namespace swrm {

RefinerParams::RefinerParams(const RefinerDims& d, Rng& rng) {
  const Eigen::Index gate_in = d.d_h_l + d.d_h_v + d.d_h_a + d.d_h_va;
  const Eigen::Index attn_in = d.d_x + d.d_h_v + d.d_h_a + d.d_h_va;
  const Eigen::Index agg_in = 2 * d.d_x;
  w1 = Parameter(uniform_init(1, gate_in, gate_in, rng));
  b1 = Parameter(Matrix::Zero(1, 1));
  w2 = Parameter(uniform_init(1, attn_in, attn_in, rng));
  b2 = Parameter(Matrix::Zero(1, 1));
  w3 = Parameter(uniform_init(1, agg_in, agg_in, rng));
  b3 = Parameter(Matrix::Zero(1, 1));
}

void RefinerParams::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".w1", w1);
  fn(prefix + ".b1", b1);
  fn(prefix + ".w2", w2);
  fn(prefix + ".b2", b2);
  fn(prefix + ".w3", w3);
  fn(prefix + ".b3", b3);
}

void RefinerParams::visit(const std::string& prefix, const ConstParamVisitor& fn) const {
  fn(prefix + ".w1", w1);
  fn(prefix + ".b1", b1);
  fn(prefix + ".w2", w2);
  fn(prefix + ".b2", b2);
  fn(prefix + ".w3", w3);
  fn(prefix + ".b3", b3);
}

ContextEncoders::ContextEncoders(Eigen::Index visual_in, Eigen::Index acoustic_in,
                                 Eigen::Index d_h_v, Eigen::Index d_h_a, Eigen::Index d_h_va,
                                 Rng& rng)
    : visual(visual_in, d_h_v, rng),
      acoustic(acoustic_in, d_h_a, rng),
      bimodal(visual_in + acoustic_in, d_h_va, rng) {}

void ContextEncoders::visit(const std::string& prefix, const ParamVisitor& fn) {
  visual.visit(prefix + ".visual", fn);
  acoustic.visit(prefix + ".acoustic", fn);
  bimodal.visit(prefix + ".bimodal", fn);
}

void ContextEncoders::visit(const std::string& prefix, const ConstParamVisitor& fn) const {
  visual.visit(prefix + ".visual", fn);
  acoustic.visit(prefix + ".acoustic", fn);
  bimodal.visit(prefix + ".bimodal", fn);
}

namespace graph {

StatesVars encode_contexts(Tape& tape, const TextEncoder& text, const ContextEncoders& encoders,
                           const Var& x_l, const Var& u_v, const Var& u_a) {
  if (x_l.rows() != u_v.rows() || x_l.rows() != u_a.rows()) {
    throw ConfigError("encode_contexts: text, visual and acoustic row counts differ");
  }
  if (x_l.cols() != text.model_dim()) {
    throw ConfigError("encode_contexts: embedding width does not match the text encoder");
  }
  if (u_v.cols() != encoders.visual.input_size() ||
      u_a.cols() != encoders.acoustic.input_size()) {
    throw ConfigError("encode_contexts: feature width does not match the encoders");
  }
  StatesVars s;
  s.h_l = text.forward(tape, x_l).tokens;
  s.h_v = encoders.visual.forward(tape, u_v);
  s.h_a = encoders.acoustic.forward(tape, u_a);
  const std::array<Var, 2> va = {u_v, u_a};
  s.h_va = encoders.bimodal.forward(tape, ops::concat_cols(va));
  return s;
}

StatesVars constant_states(Tape& tape, const EncoderStates& states) {
  return {tape.constant(states.h_l), tape.constant(states.h_v), tape.constant(states.h_a),
          tape.constant(states.h_va)};
}

namespace {

Var row_at(const Var& m, std::size_t s) {
  return ops::slice_rows(m, static_cast<Eigen::Index>(s), 1);
}

Var context_at(const StatesVars& st, std::size_t s) {
  const std::array<Var, 3> parts = {row_at(st.h_v, s), row_at(st.h_a, s), row_at(st.h_va, s)};
  return ops::concat_cols(parts);
}

}  // namespace

GateVars gate_filter(Tape& tape, const RefinerParams& params, const StatesVars& states,
                     std::size_t s, const Var& x_s, int p) {
  const std::array<Var, 4> parts = {row_at(states.h_l, s), row_at(states.h_v, s),
                                    row_at(states.h_a, s), row_at(states.h_va, s)};
  const Var g_v = ops::sigmoid(
      ops::linear(ops::concat_cols(parts), tape.parameter(params.w1), tape.parameter(params.b1)));
  const Var gp = ops::scale(g_v, static_cast<double>(p));
  return {g_v, ops::scale_by(ops::one_minus(gp), x_s)};
}

AttentionVars candidate_attention(Tape& tape, const RefinerParams& params,
                                  const Var& candidate_embeddings, const StatesVars& states,
                                  std::size_t s) {
  const Eigen::Index k = candidate_embeddings.rows();
  if (k < 1) throw std::invalid_argument("candidate_attention: no candidates");
  const std::array<Var, 2> parts = {candidate_embeddings,
                                    ops::repeat_rows(context_at(states, s), k)};
  const Var scores =
      ops::linear(ops::concat_cols(parts), tape.parameter(params.w2), tape.parameter(params.b2));
  const Var weights = ops::softmax_rows(ops::transpose(scores));
  return {weights, ops::matmul(weights, candidate_embeddings)};
}

AggregateVars aggregate(Tape& tape, const RefinerParams& params, const Var& r_e, const Var& g_v,
                        int p, const Var& r_v, const Var& mask_embedding) {
  const std::array<Var, 2> parts = {r_e, mask_embedding};
  const Var g_mask = ops::sigmoid(
      ops::linear(ops::concat_cols(parts), tape.parameter(params.w3), tape.parameter(params.b3)));
  const Var r_add = ops::add(ops::scale_by(g_mask, r_e),
                             ops::scale_by(ops::one_minus(g_mask), mask_embedding));
  const Var gp = ops::scale(g_v, static_cast<double>(p));
  return {g_mask, r_add, ops::add(ops::scale_by(gp, r_add), r_v)};
}

namespace {

RowVector row_value(const Var& v) { return v.value().row(0); }

Var splice_row(const Var& x_l, std::size_t s, const Var& row) {
  const auto n = x_l.rows();
  const auto si = static_cast<Eigen::Index>(s);
  std::vector<Var> parts;
  if (si > 0) parts.push_back(ops::slice_rows(x_l, 0, si));
  parts.push_back(row);
  if (si + 1 < n) parts.push_back(ops::slice_rows(x_l, si + 1, n - si - 1));
  return ops::concat_rows(parts);
}

}  // namespace

RefineVars refine_sequence(Tape& tape, const RefinerParams& params, const Var& x_l,
                           const DetectionResult& detection, const StatesVars& states,
                           const Var& candidate_embeddings, const Var& mask_embedding,
                           const Ablations& ablations) {
  RefineVars out;
  const auto n = static_cast<std::size_t>(x_l.rows());

  if (ablations.no_position) {
    // Mask-only update at every position, gate always open.
    std::vector<Var> rows;
    rows.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Var x_i = row_at(x_l, i);
      const GateVars gate = gate_filter(tape, params, states, i, x_i, 1);
      const Var r_l = ops::add(ops::scale_by(gate.g_v, mask_embedding), gate.r_v);
      rows.push_back(r_l);
      RefinementTrace tr;
      tr.position = i;
      tr.gate_mask = 1;
      tr.g_v = gate.g_v.scalar();
      tr.r_add = row_value(mask_embedding);
      tr.r_v = row_value(gate.r_v);
      tr.r_l = row_value(r_l);
      out.traces.push_back(std::move(tr));
    }
    out.z_l = ops::concat_rows(rows);
    return out;
  }

  const std::size_t s = detection.position;
  if (s >= n) throw std::out_of_range("refine_sequence: detected position outside sentence");
  const int p = detection.gate_mask;
  const Var x_s = row_at(x_l, s);
  const GateVars gate = gate_filter(tape, params, states, s, x_s, p);

  RefinementTrace tr;
  tr.position = s;
  tr.gate_mask = p;
  tr.g_v = gate.g_v.scalar();

  Var r_add;
  Var r_l;
  const bool use_attention = !ablations.no_attention && candidate_embeddings.valid() &&
                             candidate_embeddings.rows() > 0;
  if (use_attention) {
    const AttentionVars attn =
        candidate_attention(tape, params, candidate_embeddings, states, s);
    const AggregateVars agg =
        aggregate(tape, params, attn.r_e, gate.g_v, p, gate.r_v, mask_embedding);
    r_add = agg.r_add;
    r_l = agg.r_l;
    tr.attention_weights = row_value(attn.weights);
    tr.g_mask = agg.g_mask.scalar();
    tr.r_e = row_value(attn.r_e);
    for (const Candidate& c : detection.candidate_set.candidates) tr.candidates.push_back(c.token);
  } else {
    r_add = mask_embedding;
    r_l = ops::add(ops::scale_by(ops::scale(gate.g_v, static_cast<double>(p)), r_add), gate.r_v);
  }
  tr.r_add = row_value(r_add);
  tr.r_v = row_value(gate.r_v);
  tr.r_l = row_value(r_l);
  out.traces.push_back(std::move(tr));
  out.z_l = splice_row(x_l, s, r_l);
  return out;
}

}  // namespace graph

EncoderStates encode_contexts(const TextEncoder& text, const ContextEncoders& encoders,
                              const Matrix& x_l, const Matrix& u_v, const Matrix& u_a) {
  Tape tape;
  const graph::StatesVars s = graph::encode_contexts(tape, text, encoders, tape.constant(x_l),
                                                     tape.constant(u_v), tape.constant(u_a));
  return {s.h_l.value(), s.h_v.value(), s.h_a.value(), s.h_va.value()};
}

GateResult gate_filter(const EncoderStates& states, std::size_t s, const RowVector& x_s, int p,
                       const RefinerParams& params) {
  Tape tape;
  const graph::GateVars g = graph::gate_filter(tape, params, graph::constant_states(tape, states),
                                               s, tape.constant(x_s), p);
  return {g.g_v.scalar(), g.r_v.value().row(0)};
}

AttentionResult candidate_attention(const Matrix& candidate_embeddings,
                                    const EncoderStates& states, std::size_t s,
                                    const RefinerParams& params) {
  Tape tape;
  const graph::AttentionVars a =
      graph::candidate_attention(tape, params, tape.constant(candidate_embeddings),
                                 graph::constant_states(tape, states), s);
  return {a.weights.value().row(0), a.r_e.value().row(0)};
}

AttentionResult candidate_attention(const CandidateSet& cands, const EncoderStates& states,
                                    std::size_t s, const LmAdapter& lm,
                                    const RefinerParams& params) {
  Matrix emb(static_cast<Eigen::Index>(cands.size()), lm.dim());
  for (std::size_t t = 0; t < cands.size(); ++t) {
    emb.row(static_cast<Eigen::Index>(t)) = lm.embed_token(cands.candidates[t].token);
  }
  return candidate_attention(emb, states, s, params);
}

AggregateResult aggregate(const RowVector& r_e, double g_v, int p, const RowVector& r_v,
                          const RowVector& mask_embedding, const RefinerParams& params) {
  Tape tape;
  Matrix g(1, 1);
  g(0, 0) = g_v;
  const graph::AggregateVars a =
      graph::aggregate(tape, params, tape.constant(r_e), tape.constant(g), p, tape.constant(r_v),
                       tape.constant(mask_embedding));
  return {a.g_mask.scalar(), a.r_add.value().row(0), a.r_l.value().row(0)};
}

AggregateResult aggregate(const RowVector& r_e, double g_v, int p, const RowVector& r_v,
                          const LmAdapter& lm, const RefinerParams& params) {
  return aggregate(r_e, g_v, p, r_v, lm.mask_embedding(), params);
}

RefinementResult refine_sequence(const Matrix& x_l, const DetectionResult& detection,
                                 const EncoderStates& states,
                                 const Matrix& candidate_embeddings,
                                 const RowVector& mask_embedding, const RefinerParams& params,
                                 const Ablations& ablations) {
  Tape tape;
  const Var cand = candidate_embeddings.rows() > 0 ? tape.constant(candidate_embeddings) : Var();
  graph::RefineVars r = graph::refine_sequence(
      tape, params, tape.constant(x_l), detection, graph::constant_states(tape, states), cand,
      tape.constant(mask_embedding), ablations);
  return {r.z_l.value(), std::move(r.traces)};
}

RefinementResult refine_sequence(const Matrix& x_l, const DetectionResult& detection,
                                 const EncoderStates& states, const LmAdapter& lm,
                                 const RefinerParams& params, const Ablations& ablations) {
  Matrix emb(static_cast<Eigen::Index>(detection.candidate_set.size()), lm.dim());
  for (std::size_t t = 0; t < detection.candidate_set.size(); ++t) {
    emb.row(static_cast<Eigen::Index>(t)) =
        lm.embed_token(detection.candidate_set.candidates[t].token);
  }
  return refine_sequence(x_l, detection, states, emb, lm.mask_embedding(), params, ablations);
}

}  // namespace swrm
