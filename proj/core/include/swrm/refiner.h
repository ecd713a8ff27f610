#ifndef SWRM_REFINER_H_
#define SWRM_REFINER_H_

// Sentiment word refinement: context encoding, multimodal gating, candidate
// attention and aggregation into a refined embedding for the detected
// position.
//
// Every operation exists twice: a value-level function on Eigen matrices and
// a graph-level one (namespace swrm::graph) that records on a Tape for
// training. The value-level functions run the graph code on a scratch tape,
// so the two never diverge.

#include <cstddef>
#include <optional>
#include <vector>

#include "swrm/autograd.h"
#include "swrm/detector.h"
#include "swrm/encoders.h"
#include "swrm/lm_adapter.h"

namespace swrm {

// Contextual states at token resolution; every matrix has n_l rows.
struct EncoderStates {
  Matrix h_l;
  Matrix h_v;
  Matrix h_a;
  Matrix h_va;
};

struct RefinerDims {
  Eigen::Index d_x = 0;   // input embedding width
  Eigen::Index d_h_l = 0;
  Eigen::Index d_h_v = 0;
  Eigen::Index d_h_a = 0;
  Eigen::Index d_h_va = 0;
};

// Gate (w1, b1), attention scorer (w2, b2) and aggregation gate (w3, b3).
// Weights are single-row matrices; biases are 1x1.
struct RefinerParams {
  Parameter w1;  // 1 x (d_h_l + d_h_v + d_h_a + d_h_va)
  Parameter b1;
  Parameter w2;  // 1 x (d_x + d_h_v + d_h_a + d_h_va)
  Parameter b2;
  Parameter w3;  // 1 x 2 d_x
  Parameter b3;

  RefinerParams() = default;
  // Weights uniform in +-1/sqrt(fan_in); biases zero so every gate starts
  // near 0.5.
  RefinerParams(const RefinerDims& dims, Rng& rng);

  void visit(const std::string& prefix, const ParamVisitor& fn);
  void visit(const std::string& prefix, const ConstParamVisitor& fn) const;
};

// Recurrent encoders over pseudo-aligned visual, acoustic and concatenated
// visual+acoustic features. The text states come from the shared TextEncoder.
struct ContextEncoders {
  Lstm visual;
  Lstm acoustic;
  Lstm bimodal;

  ContextEncoders() = default;
  ContextEncoders(Eigen::Index visual_in, Eigen::Index acoustic_in, Eigen::Index d_h_v,
                  Eigen::Index d_h_a, Eigen::Index d_h_va, Rng& rng);

  void visit(const std::string& prefix, const ParamVisitor& fn);
  void visit(const std::string& prefix, const ConstParamVisitor& fn) const;
};

// Ablation switches.
struct Ablations {
  // Skip detection; refine every position with the mask-only update.
  bool no_position = false;
  // Use the mask embedding instead of candidate attention.
  bool no_attention = false;
  // Zero the visual/acoustic states seen by the gate and the attention.
  bool no_multimodal = false;

  friend bool operator==(const Ablations&, const Ablations&) = default;
};

// Throws ConfigError when row counts differ or widths do not match the
// encoders.
EncoderStates encode_contexts(const TextEncoder& text, const ContextEncoders& encoders,
                              const Matrix& x_l, const Matrix& u_v, const Matrix& u_a);

struct GateResult {
  double g_v = 0.0;
  RowVector r_v;
};

// g_v = sigmoid(w1 . [h_l[s]; h_v[s]; h_a[s]; h_va[s]] + b1),
// r_v = (1 - g_v p) x_s.
GateResult gate_filter(const EncoderStates& states, std::size_t s, const RowVector& x_s, int p,
                       const RefinerParams& params);

struct AttentionResult {
  RowVector weights;  // 1 x k, on the simplex
  RowVector r_e;
};

// Scores each candidate embedding against the multimodal context at s and
// returns the softmax-weighted combination. candidate_embeddings is k x d_x.
AttentionResult candidate_attention(const Matrix& candidate_embeddings,
                                    const EncoderStates& states, std::size_t s,
                                    const RefinerParams& params);
AttentionResult candidate_attention(const CandidateSet& cands, const EncoderStates& states,
                                    std::size_t s, const LmAdapter& lm,
                                    const RefinerParams& params);

struct AggregateResult {
  double g_mask = 0.0;
  RowVector r_add;
  RowVector r_l;
};

// g_mask = sigmoid(w3 . [r_e; x_mask] + b3),
// r_add  = g_mask r_e + (1 - g_mask) x_mask,
// r_l    = (g_v p) r_add + r_v.
AggregateResult aggregate(const RowVector& r_e, double g_v, int p, const RowVector& r_v,
                          const RowVector& mask_embedding, const RefinerParams& params);
AggregateResult aggregate(const RowVector& r_e, double g_v, int p, const RowVector& r_v,
                          const LmAdapter& lm, const RefinerParams& params);

// Intermediate quantities of one refined position.
struct RefinementTrace {
  std::size_t position = 0;
  int gate_mask = 0;
  double g_v = 0.0;
  // Empty when attention did not run (ablation or no candidates).
  RowVector attention_weights;
  std::vector<std::string> candidates;
  std::optional<double> g_mask;
  std::optional<RowVector> r_e;
  RowVector r_add;
  RowVector r_v;
  RowVector r_l;
};

struct RefinementResult {
  Matrix z_l;
  // One entry for the detected position; one per position under no_position.
  std::vector<RefinementTrace> traces;
};

// z_l equals x_l except at the refined row(s).
RefinementResult refine_sequence(const Matrix& x_l, const DetectionResult& detection,
                                 const EncoderStates& states, const LmAdapter& lm,
                                 const RefinerParams& params, const Ablations& ablations = {});

// Same, with candidate embeddings (k x d_x, may be empty) and the mask
// embedding supplied directly.
RefinementResult refine_sequence(const Matrix& x_l, const DetectionResult& detection,
                                 const EncoderStates& states,
                                 const Matrix& candidate_embeddings,
                                 const RowVector& mask_embedding, const RefinerParams& params,
                                 const Ablations& ablations = {});

namespace graph {

struct StatesVars {
  Var h_l;
  Var h_v;
  Var h_a;
  Var h_va;
};

StatesVars encode_contexts(Tape& tape, const TextEncoder& text, const ContextEncoders& encoders,
                           const Var& x_l, const Var& u_v, const Var& u_a);

// Constant states, e.g. for evaluating the refiner on fixed EncoderStates.
StatesVars constant_states(Tape& tape, const EncoderStates& states);

struct GateVars {
  Var g_v;  // 1x1
  Var r_v;  // 1 x d_x
};

GateVars gate_filter(Tape& tape, const RefinerParams& params, const StatesVars& states,
                     std::size_t s, const Var& x_s, int p);

struct AttentionVars {
  Var weights;  // 1 x k
  Var r_e;      // 1 x d_x
};

AttentionVars candidate_attention(Tape& tape, const RefinerParams& params,
                                  const Var& candidate_embeddings, const StatesVars& states,
                                  std::size_t s);

struct AggregateVars {
  Var g_mask;
  Var r_add;
  Var r_l;
};

AggregateVars aggregate(Tape& tape, const RefinerParams& params, const Var& r_e, const Var& g_v,
                        int p, const Var& r_v, const Var& mask_embedding);

struct RefineVars {
  Var z_l;
  std::vector<RefinementTrace> traces;
};

// candidate_embeddings may be an invalid Var when there are no candidates.
RefineVars refine_sequence(Tape& tape, const RefinerParams& params, const Var& x_l,
                           const DetectionResult& detection, const StatesVars& states,
                           const Var& candidate_embeddings, const Var& mask_embedding,
                           const Ablations& ablations);

}  // namespace graph
}  // namespace swrm

#endif  // SWRM_REFINER_H_
