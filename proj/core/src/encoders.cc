#include "swrm/encoders.h"

#include <cmath>
#include <vector>

namespace swrm {

Matrix uniform_init(Eigen::Index rows, Eigen::Index cols, Eigen::Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(fan_in, 1)));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  }
  return m;
}

Linear::Linear(Eigen::Index in, Eigen::Index out, Rng& rng)
    : weight(uniform_init(out, in, in, rng)), bias(Matrix::Zero(1, out)) {}

Var Linear::forward(Tape& tape, const Var& x) const {
  return ops::linear(x, tape.parameter(weight), tape.parameter(bias));
}

void Linear::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".weight", weight);
  fn(prefix + ".bias", bias);
}

void Linear::visit(const std::string& prefix, const ConstParamVisitor& fn) const {
  fn(prefix + ".weight", weight);
  fn(prefix + ".bias", bias);
}

Lstm::Lstm(Eigen::Index input_size, Eigen::Index hidden_size, Rng& rng)
    : w_ih_(uniform_init(4 * hidden_size, input_size, hidden_size, rng)),
      w_hh_(uniform_init(4 * hidden_size, hidden_size, hidden_size, rng)),
      bias_(Matrix::Zero(1, 4 * hidden_size)) {}

Var Lstm::forward(Tape& tape, const Var& x) const {
  const Eigen::Index h = hidden_size();
  const Var w_ih = tape.parameter(w_ih_);
  const Var w_hh = tape.parameter(w_hh_);
  const Var b = tape.parameter(bias_);
  // Input projections for every step at once.
  const Var projected = ops::linear(x, w_ih, b);
  Var hidden = tape.constant(Matrix::Zero(1, h));
  Var cell = tape.constant(Matrix::Zero(1, h));
  std::vector<Var> outputs;
  outputs.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index t = 0; t < x.rows(); ++t) {
    const Var gates = ops::add(ops::slice_rows(projected, t, 1), ops::matmul_bt(hidden, w_hh));
    const Var in_gate = ops::sigmoid(ops::slice_cols(gates, 0, h));
    const Var forget_gate = ops::sigmoid(ops::slice_cols(gates, h, h));
    const Var out_gate = ops::sigmoid(ops::slice_cols(gates, 2 * h, h));
    const Var candidate = ops::tanh(ops::slice_cols(gates, 3 * h, h));
    cell = ops::add(ops::mul(forget_gate, cell), ops::mul(in_gate, candidate));
    hidden = ops::mul(out_gate, ops::tanh(cell));
    outputs.push_back(hidden);
  }
  return ops::concat_rows(outputs);
}

Matrix Lstm::run(const Matrix& x) const {
  Tape tape;
  return forward(tape, tape.constant(x)).value();
}

void Lstm::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".w_ih", w_ih_);
  fn(prefix + ".w_hh", w_hh_);
  fn(prefix + ".bias", bias_);
}

void Lstm::visit(const std::string& prefix, const ConstParamVisitor& fn) const {
  fn(prefix + ".w_ih", w_ih_);
  fn(prefix + ".w_hh", w_hh_);
  fn(prefix + ".bias", bias_);
}

Matrix sinusoidal_positions(Eigen::Index n, Eigen::Index d) {
  Matrix p(n, d);
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
      const double angle = static_cast<double>(pos) * rate;
      p(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return p;
}

TextEncoder::TextEncoder(Eigen::Index model_dim, Eigen::Index ffn_dim, Rng& rng)
    : cls_(uniform_init(1, model_dim, model_dim, rng)),
      w_query_(uniform_init(model_dim, model_dim, model_dim, rng)),
      w_key_(uniform_init(model_dim, model_dim, model_dim, rng)),
      w_value_(uniform_init(model_dim, model_dim, model_dim, rng)),
      w_out_(uniform_init(model_dim, model_dim, model_dim, rng)),
      ffn_in_(model_dim, ffn_dim, rng),
      ffn_out_(ffn_dim, model_dim, rng) {}

TextEncoding TextEncoder::forward(Tape& tape, const Var& embeddings) const {
  const Eigen::Index d = model_dim();
  const Eigen::Index n = embeddings.rows();
  const std::vector<Var> rows = {tape.parameter(cls_), embeddings};
  const Var x = ops::add(ops::concat_rows(rows), tape.constant(sinusoidal_positions(n + 1, d)));

  const Var q = ops::matmul_bt(x, tape.parameter(w_query_));
  const Var k = ops::matmul_bt(x, tape.parameter(w_key_));
  const Var v = ops::matmul_bt(x, tape.parameter(w_value_));
  const Var attn =
      ops::softmax_rows(ops::scale(ops::matmul_bt(q, k), 1.0 / std::sqrt(static_cast<double>(d))));
  const Var h1 = ops::add(x, ops::matmul_bt(ops::matmul(attn, v), tape.parameter(w_out_)));
  const Var h2 = ops::add(h1, ffn_out_.forward(tape, ops::tanh(ffn_in_.forward(tape, h1))));

  return {ops::slice_rows(h2, 0, 1), ops::slice_rows(h2, 1, n)};
}

void TextEncoder::visit(const std::string& prefix, const ParamVisitor& fn) {
  fn(prefix + ".cls", cls_);
  fn(prefix + ".w_query", w_query_);
  fn(prefix + ".w_key", w_key_);
  fn(prefix + ".w_value", w_value_);
  fn(prefix + ".w_out", w_out_);
  ffn_in_.visit(prefix + ".ffn_in", fn);
  ffn_out_.visit(prefix + ".ffn_out", fn);
}

void TextEncoder::visit(const std::string& prefix, const ConstParamVisitor& fn) const {
  fn(prefix + ".cls", cls_);
  fn(prefix + ".w_query", w_query_);
  fn(prefix + ".w_key", w_key_);
  fn(prefix + ".w_value", w_value_);
  fn(prefix + ".w_out", w_out_);
  ffn_in_.visit(prefix + ".ffn_in", fn);
  ffn_out_.visit(prefix + ".ffn_out", fn);
}

}  // namespace swrm
