#pragma once

#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace songsmith {

using Matrix = Eigen::MatrixXd;

/// A named trainable tensor with its gradient accumulator.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

namespace ad {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Matrix& value() const;
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

/// Reverse-mode tape. Nodes are appended in evaluation order; backward()
/// walks them in reverse. Matrices are column-major with one column per
/// batch element throughout the network code.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  /// Leaf bound to a parameter. The value is copied, so later in-place
  /// updates of the parameter do not disturb this tape.
  Var parameter(Parameter& p);

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates. Gradients of
  /// parameter leaves are added to Parameter::grad. May be called more
  /// than once; node gradients are reset on every call.
  void backward(Var root);
  /// Gradient of a node from the last backward() (zero matrix if untouched).
  Matrix grad(Var v) const;

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  // Op-construction interface.
  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& out_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  Var push(Matrix value, std::initializer_list<Var> parents, BackwardFn backward);
  Var push(Matrix value, std::span<const Var> parents, BackwardFn backward);
  template <typename Expr>
  void accumulate(int id, const Expr& g) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  bool grad_enabled_;
  std::vector<Node> nodes_;
};

// Element-wise and linear-algebra ops. Shapes follow Eigen conventions.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// a / s, exact for the value (no reciprocal rounding).
Var divide(Var a, double s);
Var add_scalar(Var a, double s);
/// x (n x B) + b (n x 1) broadcast over columns.
Var add_bias(Var x, Var b);
/// Repeats an n x 1 column `cols` times.
Var broadcast_cols(Var v, Eigen::Index cols);
Var sigmoid(Var a);
Var tanh(Var a);
Var softplus(Var a);
Var square(Var a);
Var concat_rows(std::span<const Var> parts);
Var concat_rows(std::initializer_list<Var> parts);
Var slice_rows(Var a, Eigen::Index start, Eigen::Index count);
/// Column-wise softmax.
Var softmax_cols(Var a);
/// Forward value `hard`; backward passes the incoming gradient to `soft`
/// unchanged (straight-through estimator).
Var straight_through(Var soft, Matrix hard);
Var sum_all(Var a);
Var mean_all(Var a);
/// Mean over columns of -log softmax(logits)[target], targets 0-based.
Var cross_entropy(Var logits, std::span<const int> targets);

Var operator+(Var a, Var b);
Var operator-(Var a, Var b);

}  // namespace ad
}  // namespace songsmith
