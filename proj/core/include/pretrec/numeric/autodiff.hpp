#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pretrec/numeric/rng.hpp"
#include "pretrec/numeric/tensor.hpp"

namespace pretrec {

// A named trainable tensor with its accumulated gradient.
struct Parameter {
  Parameter() = default;
  Parameter(std::string name, Tensor2 initial, bool trainable = true)
      : name(std::move(name)),
        value(std::move(initial)),
        gradient(value.rows(), value.cols()),
        trainable(trainable) {}

  void zero_grad() { gradient.fill(0.0); }

  std::string name;
  Tensor2 value;
  Tensor2 gradient;
  bool trainable = true;
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Tensor2& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Reverse-mode recorder. Build a forward expression with the free functions below, then call
// backward() on a 1x1 result; gradients land in Parameter::gradient (accumulated, not assigned).
// Sparse operands passed to spmm() must outlive the tape.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor2 value);
  Var parameter(Parameter& p);

  void backward(Var scalar);

  const Tensor2& value(Var v) const { return nodes_[v.id_].value; }
  // Gradient of the last backward() target w.r.t. this node; zero-shaped if unreached.
  const Tensor2& grad(Var v);
  std::size_t size() const noexcept { return nodes_.size(); }

  // Called with the node's forward value and its incoming gradient; accumulates into parents
  // through grad_buffer().
  using Backward = std::function<void(Tape&, const Tensor2& value, const Tensor2& grad)>;
  // Records a node. `backward` is dropped when no operand requires a gradient.
  Var record(Tensor2 value, bool requires_grad, Backward backward);
  bool requires_grad(Var v) const { return nodes_[v.id_].requires_grad; }
  Tensor2& grad_buffer(Var v);

 private:
  struct Node {
    Tensor2 value;
    Tensor2 grad;
    bool requires_grad = false;
    bool grad_allocated = false;
    Parameter* parameter = nullptr;
    Backward backward;
  };
  std::deque<Node> nodes_;
};

// --- forward operations -------------------------------------------------------------------

Var matmul(Var a, Var b);
Var spmm(const SparseMatrix& s, Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
// a (n x k) + row vector b (1 x k) broadcast over rows.
Var add_row(Var a, Var b);
Var hadamard(Var a, Var b);
Var scale(Var a, double c);
Var relu(Var a);
Var sigmoid(Var a);
// Inverted dropout: zero each entry with probability `ratio`, scale survivors by 1/(1-ratio).
// Identity when !training or ratio == 0. ratio must lie in [0, 1).
Var dropout(Var a, double ratio, RngStream& rng, bool training);
Var gather_rows(Var a, std::span<const std::size_t> rows);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
// Row-wise dot product of equally shaped matrices -> n x 1.
Var rowwise_dot(Var a, Var b);
Var concat_cols(Var a, Var b);
Var mean_of(std::span<const Var> terms);
Var sum(Var a);
Var sum_squares(Var a);
// sum_i -[y_i log(max(s(x_i), 1e-12)) + (1 - y_i) log(max(1 - s(x_i), 1e-12))], s = logistic.
Var bce_with_logits(Var logits, std::span<const double> labels);
// sum_i -log s(x_i), evaluated stably.
Var neg_log_sigmoid_sum(Var x);

// Non-recording element-wise helpers.
double logistic(double x) noexcept;
double softplus(double x) noexcept;

}  // namespace pretrec
