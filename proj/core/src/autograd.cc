#include "swrm/autograd.h"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace swrm {

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  assert(v.size() == 1);
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), Matrix(), nullptr});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

Var Tape::parameter(const Parameter& param) {
  Var v = constant(param.value);
  bindings_.emplace_back(v.id(), &param);
  return v;
}

Var Tape::input(Matrix value) { return constant(std::move(value)); }

Var Tape::record(Matrix value, BackwardFn backward) {
  nodes_.push_back(Node{std::move(value), Matrix(), std::move(backward)});
  return Var(this, static_cast<int>(nodes_.size() - 1));
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(const Var& out) {
  if (out.tape() != this || nodes_[out.id()].value.size() != 1) {
    throw std::logic_error("backward() needs a 1x1 node of this tape");
  }
  for (Node& n : nodes_) n.grad.resize(0, 0);
  nodes_[out.id()].grad = Matrix::Ones(1, 1);
  for (int i = out.id(); i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.grad.size() == 0) continue;
    // Callbacks only touch parents (ids < i) and never grow nodes_.
    if (n.backward) n.backward(*this, n.grad);
  }
}

Matrix Tape::grad(const Var& v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::label(const Var& v, std::string role) {
  labels_.emplace_back(v.id(), std::move(role));
}

std::string Tape::first_nonfinite_role() const {
  for (const auto& [id, role] : labels_) {
    if (!nodes_[id].value.allFinite()) return role;
  }
  return {};
}

namespace ops {
namespace {

Tape& tape_of(const Var& a) {
  assert(a.valid());
  return *a.tape();
}

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: shape mismatch");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() * b.value(),
                           [ia, ib](Tape& t, const Matrix& g) {
                             t.accumulate(ia, g * t.value(ib).transpose());
                             t.accumulate(ib, t.value(ia).transpose() * g);
                           });
}

Var matmul_bt(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_bt: shape mismatch");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() * b.value().transpose(),
                           [ia, ib](Tape& t, const Matrix& g) {
                             t.accumulate(ia, g * t.value(ib));
                             t.accumulate(ib, g.transpose() * t.value(ia));
                           });
}

Var transpose(const Var& a) {
  const int ia = a.id();
  return tape_of(a).record(a.value().transpose(), [ia](Tape& t, const Matrix& g) {
    t.accumulate(ia, g.transpose());
  });
}

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() + b.value(), [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value() - b.value(), [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, -g);
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  const int ia = a.id(), ib = b.id();
  return tape_of(a).record(a.value().cwiseProduct(b.value()),
                           [ia, ib](Tape& t, const Matrix& g) {
                             t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                             t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                           });
}

Var add_row(const Var& a, const Var& b) {
  if (b.rows() != 1 || b.cols() != a.cols()) {
    throw std::invalid_argument("add_row: shape mismatch");
  }
  const int ia = a.id(), ib = b.id();
  Matrix out = a.value().rowwise() + b.value().row(0);
  return tape_of(a).record(std::move(out), [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g.colwise().sum());
  });
}

Var scale(const Var& a, double c) {
  const int ia = a.id();
  return tape_of(a).record(a.value() * c, [ia, c](Tape& t, const Matrix& g) {
    t.accumulate(ia, g * c);
  });
}

Var scale_by(const Var& s, const Var& a) {
  if (s.value().size() != 1) throw std::invalid_argument("scale_by: s must be 1x1");
  const int is = s.id(), ia = a.id();
  return tape_of(a).record(s.scalar() * a.value(), [is, ia](Tape& t, const Matrix& g) {
    Matrix ds(1, 1);
    ds(0, 0) = g.cwiseProduct(t.value(ia)).sum();
    t.accumulate(is, ds);
    t.accumulate(ia, t.value(is)(0, 0) * g);
  });
}

Var one_minus(const Var& a) {
  const int ia = a.id();
  Matrix out = (1.0 - a.value().array()).matrix();
  return tape_of(a).record(std::move(out), [ia](Tape& t, const Matrix& g) {
    t.accumulate(ia, -g);
  });
}

Var sigmoid(const Var& a) {
  const int ia = a.id();
  Matrix out = a.value().unaryExpr([](double x) { return swrm::sigmoid(x); });
  Matrix y = out;
  return tape_of(a).record(std::move(out), [ia, y](Tape& t, const Matrix& g) {
    t.accumulate(ia, g.cwiseProduct((y.array() * (1.0 - y.array())).matrix()));
  });
}

Var tanh(const Var& a) {
  const int ia = a.id();
  Matrix out = a.value().array().tanh().matrix();
  Matrix y = out;
  return tape_of(a).record(std::move(out), [ia, y](Tape& t, const Matrix& g) {
    t.accumulate(ia, g.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var relu(const Var& a) {
  const int ia = a.id();
  Matrix out = a.value().cwiseMax(0.0);
  return tape_of(a).record(std::move(out), [ia](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(ia);
    t.accumulate(ia, (x.array() > 0.0).select(g, 0.0).matrix());
  });
}

Var abs(const Var& a) {
  const int ia = a.id();
  Matrix out = a.value().cwiseAbs();
  return tape_of(a).record(std::move(out), [ia](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(ia);
    Matrix sign = x.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    t.accumulate(ia, g.cwiseProduct(sign));
  });
}

Var softmax_rows(const Var& a) {
  const int ia = a.id();
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    out.row(r) = stable_softmax(a.value().row(r));
  }
  Matrix y = out;
  return tape_of(a).record(std::move(out), [ia, y](Tape& t, const Matrix& g) {
    Matrix da(y.rows(), y.cols());
    for (Eigen::Index r = 0; r < y.rows(); ++r) {
      const double dot = g.row(r).dot(y.row(r));
      da.row(r) = y.row(r).cwiseProduct((g.row(r).array() - dot).matrix());
    }
    t.accumulate(ia, da);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    layout.emplace_back(p.id(), p.cols());
    offset += p.cols();
  }
  return tape_of(parts[0]).record(std::move(out), [layout](Tape& t, const Matrix& g) {
    Eigen::Index off = 0;
    for (const auto& [id, c] : layout) {
      t.accumulate(id, g.middleCols(off, c));
      off += c;
    }
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
  const Eigen::Index cols = parts[0].cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw std::invalid_argument("concat_rows: col mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index offset = 0;
  for (const Var& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    layout.emplace_back(p.id(), p.rows());
    offset += p.rows();
  }
  return tape_of(parts[0]).record(std::move(out), [layout](Tape& t, const Matrix& g) {
    Eigen::Index off = 0;
    for (const auto& [id, r] : layout) {
      t.accumulate(id, g.middleRows(off, r));
      off += r;
    }
  });
}

Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) {
    throw std::out_of_range("slice_rows: range outside matrix");
  }
  const int ia = a.id();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  return tape_of(a).record(a.value().middleRows(start, count),
                           [ia, rows, cols, start, count](Tape& t, const Matrix& g) {
                             Matrix da = Matrix::Zero(rows, cols);
                             da.middleRows(start, count) = g;
                             t.accumulate(ia, da);
                           });
}

Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.cols()) {
    throw std::out_of_range("slice_cols: range outside matrix");
  }
  const int ia = a.id();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  return tape_of(a).record(a.value().middleCols(start, count),
                           [ia, rows, cols, start, count](Tape& t, const Matrix& g) {
                             Matrix da = Matrix::Zero(rows, cols);
                             da.middleCols(start, count) = g;
                             t.accumulate(ia, da);
                           });
}

Var repeat_rows(const Var& a, Eigen::Index n) {
  if (a.rows() != 1) throw std::invalid_argument("repeat_rows: expects a row");
  const int ia = a.id();
  Matrix out = a.value().replicate(n, 1);
  return tape_of(a).record(std::move(out), [ia](Tape& t, const Matrix& g) {
    t.accumulate(ia, g.colwise().sum());
  });
}

Var sum(const Var& a) {
  const int ia = a.id();
  const Eigen::Index rows = a.rows(), cols = a.cols();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return tape_of(a).record(std::move(out), [ia, rows, cols](Tape& t, const Matrix& g) {
    t.accumulate(ia, Matrix::Constant(rows, cols, g(0, 0)));
  });
}

Var mean(const Var& a) {
  return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var linear(const Var& x, const Var& w, const Var& b) {
  return add_row(matmul_bt(x, w), b);
}

}  // namespace ops

RowVector stable_softmax(const RowVector& scores) {
  const double m = scores.maxCoeff();
  RowVector e = (scores.array() - m).exp().matrix();
  return e / e.sum();
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace swrm
