#ifndef SWRM_ENCODERS_H_
#define SWRM_ENCODERS_H_

// Trainable building blocks shared by the refinement and fusion stages.

#include <functional>
#include <random>
#include <string>

#include "swrm/autograd.h"

namespace swrm {

using Rng = std::mt19937_64;
using ParamVisitor = std::function<void(const std::string& name, Parameter& p)>;
using ConstParamVisitor = std::function<void(const std::string& name, const Parameter& p)>;

// Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
Matrix uniform_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng);

// y = x W^T + b.
struct Linear {
  Parameter weight;  // out x in
  Parameter bias;    // 1 x out

  Linear() = default;
  Linear(Eigen::Index in, Eigen::Index out, Rng& rng);

  Var forward(Tape& tape, const Var& x) const;
  Eigen::Index in_features() const { return weight.value.cols(); }
  Eigen::Index out_features() const { return weight.value.rows(); }

  void visit(const std::string& prefix, const ParamVisitor& fn);
  void visit(const std::string& prefix, const ConstParamVisitor& fn) const;
};

// Single-layer unidirectional LSTM. Gate order in the stacked weights is
// input, forget, output, candidate.
class Lstm {
 public:
  Lstm() = default;
  Lstm(Eigen::Index input_size, Eigen::Index hidden_size, Rng& rng);

  // x: n x input_size -> n x hidden_size (output at every step).
  Var forward(Tape& tape, const Var& x) const;
  Matrix run(const Matrix& x) const;

  Eigen::Index input_size() const { return w_ih_.value.cols(); }
  Eigen::Index hidden_size() const { return w_hh_.value.cols(); }

  void visit(const std::string& prefix, const ParamVisitor& fn);
  void visit(const std::string& prefix, const ConstParamVisitor& fn) const;

 private:
  Parameter w_ih_;  // 4h x in
  Parameter w_hh_;  // 4h x h
  Parameter bias_;  // 1 x 4h
};

// Fixed sinusoidal position table, n x d.
Matrix sinusoidal_positions(Eigen::Index n, Eigen::Index d);

struct TextEncoding {
  Var cls;     // 1 x d, representation of the sequence-start slot
  Var tokens;  // n x d, one contextual state per input row
};

// Contextual text encoder: a learned sequence-start embedding is prepended,
// sinusoidal positions are added, then one residual single-head
// self-attention block and one residual tanh feed-forward block are applied.
// Model width equals the input embedding width.
class TextEncoder {
 public:
  TextEncoder() = default;
  TextEncoder(Eigen::Index model_dim, Eigen::Index ffn_dim, Rng& rng);

  TextEncoding forward(Tape& tape, const Var& embeddings) const;

  Eigen::Index model_dim() const { return cls_.value.cols(); }

  void visit(const std::string& prefix, const ParamVisitor& fn);
  void visit(const std::string& prefix, const ConstParamVisitor& fn) const;

 private:
  Parameter cls_;
  Parameter w_query_;
  Parameter w_key_;
  Parameter w_value_;
  Parameter w_out_;
  Linear ffn_in_;
  Linear ffn_out_;
};

}  // namespace swrm

#endif  // SWRM_ENCODERS_H_
