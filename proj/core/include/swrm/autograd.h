#ifndef SWRM_AUTOGRAD_H_
#define SWRM_AUTOGRAD_H_

// Minimal reverse-mode automatic differentiation over dense double matrices.
//
// A Tape records every operation of one forward pass. Vectors are row
// vectors (1 x d) and sequences are matrices with one row per time step.
// Calling Tape::backward() on a 1x1 result propagates gradients to every
// node; gradients of bound Parameters are read with for_each_parameter_grad().

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace swrm {

using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;

// A trainable tensor and its accumulated gradient.
struct Parameter {
  Matrix value;
  Matrix grad;

  Parameter() = default;
  explicit Parameter(Matrix v)
      : value(std::move(v)), grad(Matrix::Zero(value.rows(), value.cols())) {}
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the Tape lives.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Matrix& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  // Leaf holding a copy of `param.value`. After backward(), its gradient is
  // reported by for_each_parameter_grad().
  Var parameter(const Parameter& param);
  // Leaf whose gradient can be read back with grad() after backward().
  Var input(Matrix value);

  // Records an op result; `backward` receives the output gradient and must
  // call accumulate() for each parent.
  Var record(Matrix value, BackwardFn backward);

  void accumulate(int id, const Matrix& g);
  void backward(const Var& scalar_output);

  const Matrix& value(int id) const { return nodes_[id].value; }
  // Gradient of the last backward() target w.r.t. `v`; zeros if unreached.
  Matrix grad(const Var& v) const;

  // Attaches a human-readable role to a node for divergence diagnostics.
  void label(const Var& v, std::string role);
  // First labelled node (in recording order) holding a non-finite entry, or
  // an empty string.
  std::string first_nonfinite_role() const;

  // Calls fn(param, grad) for every parameter leaf reached by backward().
  // A parameter bound more than once is reported once per binding.
  template <typename Fn>
  void for_each_parameter_grad(Fn&& fn) const {
    for (const auto& [id, param] : bindings_) {
      if (nodes_[id].grad.size() != 0) fn(*param, nodes_[id].grad);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::vector<std::pair<int, const Parameter*>> bindings_;
  std::vector<std::pair<int, std::string>> labels_;
};

namespace ops {

Var matmul(const Var& a, const Var& b);
// a * b^T
Var matmul_bt(const Var& a, const Var& b);
Var transpose(const Var& a);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
// Element-wise product.
Var mul(const Var& a, const Var& b);
// Adds the 1 x cols row `b` to every row of `a`.
Var add_row(const Var& a, const Var& b);
Var scale(const Var& a, double c);
// `s` is 1x1; returns s * a.
Var scale_by(const Var& s, const Var& a);
// 1 - a, element-wise.
Var one_minus(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var abs(const Var& a);
Var softmax_rows(const Var& a);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
// Stacks the 1 x d row `a` `n` times.
Var repeat_rows(const Var& a, Eigen::Index n);
Var sum(const Var& a);
Var mean(const Var& a);
// x * W^T + b, with W (out x in) and b (1 x out).
Var linear(const Var& x, const Var& w, const Var& b);

}  // namespace ops

// Numerically stable softmax of a row vector (max subtraction).
RowVector stable_softmax(const RowVector& scores);

double sigmoid(double x);

}  // namespace swrm

#endif  // SWRM_AUTOGRAD_H_
