#include "songsmith/net/autodiff.hpp"

#include <cmath>

#include "songsmith/core/types.hpp"

namespace songsmith::ad {

const Matrix& Var::value() const { return tape_->value(id_); }

Var Tape::constant(Matrix value) {
  nodes_.push_back({std::move(value), {}, false, {}, nullptr});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::parameter(Parameter& p) {
  nodes_.push_back({p.value, {}, grad_enabled_, {}, &p});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(Matrix value, std::span<const Var> parents, BackwardFn backward) {
  bool needs = false;
  for (const Var& p : parents) {
    if (p.tape_ != this) throw Error("autodiff: operands live on different tapes");
    needs = needs || nodes_[static_cast<std::size_t>(p.id_)].requires_grad;
  }
  nodes_.push_back({std::move(value), {}, needs, needs ? std::move(backward) : BackwardFn{}, nullptr});
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Tape::push(Matrix value, std::initializer_list<Var> parents, BackwardFn backward) {
  return push(std::move(value), std::span<const Var>(parents.begin(), parents.size()),
              std::move(backward));
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw Error("autodiff: root is not on this tape");
  if (root.value().size() != 1) throw Error("autodiff: backward needs a scalar root");
  for (auto& n : nodes_) n.grad.resize(0, 0);
  if (!nodes_[static_cast<std::size_t>(root.id_)].requires_grad) return;
  nodes_[static_cast<std::size_t>(root.id_)].grad = Matrix::Ones(1, 1);
  for (int i = root.id_; i >= 0; --i) {
    auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param) {
      if (n.param->grad.rows() != n.value.rows() || n.param->grad.cols() != n.value.cols()) {
        n.param->grad = Matrix::Zero(n.value.rows(), n.value.cols());
      }
      n.param->grad += n.grad;
    }
  }
}

Matrix Tape::grad(Var v) const {
  const auto& n = nodes_[static_cast<std::size_t>(v.id_)];
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

namespace {

void check_same_shape(Var a, Var b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(std::string("autodiff ") + op + ": shape mismatch (" + std::to_string(a.rows()) +
                "x" + std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                std::to_string(b.cols()) + ")");
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  if (a.cols() != b.rows()) {
    throw Error("autodiff matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                std::to_string(b.rows()) + ")");
  }
  Tape& t = *a.tape();
  const int ia = a.id(), ib = b.id();
  return t.push(a.value() * b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g * t.value(ib).transpose());
    if (t.requires_grad(ib)) t.accumulate(ib, t.value(ia).transpose() * g);
  });
}

Var add(Var a, Var b) {
  check_same_shape(a, b, "add");
  const int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value() + b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.out_grad(self));
    t.accumulate(ib, t.out_grad(self));
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a, b, "sub");
  const int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value() - b.value(), {a, b}, [ia, ib](Tape& t, int self) {
    t.accumulate(ia, t.out_grad(self));
    t.accumulate(ib, -t.out_grad(self));
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a, b, "mul");
  const int ia = a.id(), ib = b.id();
  return a.tape()->push(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    if (t.requires_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
    if (t.requires_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
  });
}

Var scale(Var a, double s) {
  const int ia = a.id();
  return a.tape()->push(a.value() * s, {a},
                        [ia, s](Tape& t, int self) { t.accumulate(ia, t.out_grad(self) * s); });
}

Var divide(Var a, double s) {
  const int ia = a.id();
  return a.tape()->push(a.value() / s, {a},
                        [ia, s](Tape& t, int self) { t.accumulate(ia, t.out_grad(self) / s); });
}

Var add_scalar(Var a, double s) {
  const int ia = a.id();
  return a.tape()->push((a.value().array() + s).matrix(), {a},
                        [ia](Tape& t, int self) { t.accumulate(ia, t.out_grad(self)); });
}

Var add_bias(Var x, Var b) {
  if (b.cols() != 1 || b.rows() != x.rows()) throw Error("autodiff add_bias: bias shape mismatch");
  const int ix = x.id(), ib = b.id();
  Matrix v = x.value().colwise() + b.value().col(0);
  return x.tape()->push(std::move(v), {x, b}, [ix, ib](Tape& t, int self) {
    t.accumulate(ix, t.out_grad(self));
    if (t.requires_grad(ib)) t.accumulate(ib, t.out_grad(self).rowwise().sum());
  });
}

Var broadcast_cols(Var v, Eigen::Index cols) {
  if (v.cols() != 1) throw Error("autodiff broadcast_cols: expects a column");
  const int iv = v.id();
  return v.tape()->push(v.value().replicate(1, cols), {v}, [iv](Tape& t, int self) {
    t.accumulate(iv, t.out_grad(self).rowwise().sum());
  });
}

Var sigmoid(Var a) {
  const int ia = a.id();
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return a.tape()->push(std::move(y), {a}, [ia](Tape& t, int self) {
    const auto y = t.value(self).array();
    t.accumulate(ia, (t.out_grad(self).array() * y * (1.0 - y)).matrix());
  });
}

Var tanh(Var a) {
  const int ia = a.id();
  return a.tape()->push(a.value().array().tanh().matrix(), {a}, [ia](Tape& t, int self) {
    const auto y = t.value(self).array();
    t.accumulate(ia, (t.out_grad(self).array() * (1.0 - y * y)).matrix());
  });
}

Var softplus(Var a) {
  const int ia = a.id();
  // log(1 + e^x) = max(x, 0) + log1p(e^-|x|)
  Matrix y = a.value().unaryExpr(
      [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
  return a.tape()->push(std::move(y), {a}, [ia](Tape& t, int self) {
    const Matrix sig = t.value(ia).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    t.accumulate(ia, t.out_grad(self).cwiseProduct(sig));
  });
}

Var square(Var a) {
  const int ia = a.id();
  return a.tape()->push(a.value().cwiseAbs2(), {a}, [ia](Tape& t, int self) {
    t.accumulate(ia, 2.0 * t.out_grad(self).cwiseProduct(t.value(ia)));
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw Error("autodiff concat_rows: no parts");
  const Eigen::Index cols = parts.front().cols();
  Eigen::Index rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) throw Error("autodiff concat_rows: column counts differ");
    rows += p.rows();
  }
  Matrix v(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index r = 0;
  for (const Var& p : parts) {
    if (p.rows() > 0) v.middleRows(r, p.rows()) = p.value();
    layout.emplace_back(p.id(), r);
    r += p.rows();
  }
  return parts.front().tape()->push(std::move(v), parts, [layout](Tape& t, int self) {
    const Matrix& g = t.out_grad(self);
    for (const auto& [id, offset] : layout) {
      if (t.requires_grad(id) && t.value(id).rows() > 0) {
        t.accumulate(id, g.middleRows(offset, t.value(id).rows()));
      }
    }
  });
}

Var concat_rows(std::initializer_list<Var> parts) {
  return concat_rows(std::span<const Var>(parts.begin(), parts.size()));
}

Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > a.rows()) throw Error("autodiff slice_rows: out of range");
  const int ia = a.id();
  const Eigen::Index rows = a.rows();
  return a.tape()->push(a.value().middleRows(start, count), {a},
                        [ia, start, count, rows](Tape& t, int self) {
                          Matrix g = Matrix::Zero(rows, t.out_grad(self).cols());
                          g.middleRows(start, count) = t.out_grad(self);
                          t.accumulate(ia, g);
                        });
}

Var softmax_cols(Var a) {
  const int ia = a.id();
  Matrix y = a.value();
  for (Eigen::Index c = 0; c < y.cols(); ++c) {
    const double m = y.col(c).maxCoeff();
    y.col(c) = (y.col(c).array() - m).exp().matrix();
    y.col(c) /= y.col(c).sum();
  }
  return a.tape()->push(std::move(y), {a}, [ia](Tape& t, int self) {
    const Matrix& y = t.value(self);
    const Matrix& g = t.out_grad(self);
    // dx = y * (g - sum(g * y))
    const Eigen::RowVectorXd dots = (g.cwiseProduct(y)).colwise().sum();
    t.accumulate(ia, y.cwiseProduct(g - dots.replicate(g.rows(), 1)));
  });
}

Var straight_through(Var soft, Matrix hard) {
  if (hard.rows() != soft.rows() || hard.cols() != soft.cols()) {
    throw Error("autodiff straight_through: shape mismatch");
  }
  const int is = soft.id();
  return soft.tape()->push(std::move(hard), {soft},
                           [is](Tape& t, int self) { t.accumulate(is, t.out_grad(self)); });
}

Var sum_all(Var a) {
  const int ia = a.id();
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return a.tape()->push(std::move(v), {a}, [ia](Tape& t, int self) {
    const double g = t.out_grad(self)(0, 0);
    t.accumulate(ia, Matrix::Constant(t.value(ia).rows(), t.value(ia).cols(), g));
  });
}

Var mean_all(Var a) {
  if (a.value().size() == 0) throw Error("autodiff mean_all: empty input");
  return scale(sum_all(a), 1.0 / static_cast<double>(a.value().size()));
}

Var cross_entropy(Var logits, std::span<const int> targets) {
  if (static_cast<Eigen::Index>(targets.size()) != logits.cols()) {
    throw Error("autodiff cross_entropy: one target per column required");
  }
  const Matrix& z = logits.value();
  Matrix probs(z.rows(), z.cols());
  double loss = 0.0;
  for (Eigen::Index c = 0; c < z.cols(); ++c) {
    const int k = targets[static_cast<std::size_t>(c)];
    if (k < 0 || k >= z.rows()) throw Error("autodiff cross_entropy: target out of range");
    const double m = z.col(c).maxCoeff();
    probs.col(c) = (z.col(c).array() - m).exp().matrix();
    const double s = probs.col(c).sum();
    probs.col(c) /= s;
    loss += -(z(k, c) - m - std::log(s));
  }
  const auto n = static_cast<double>(z.cols());
  Matrix v(1, 1);
  v(0, 0) = loss / n;
  std::vector<int> tgt(targets.begin(), targets.end());
  const int il = logits.id();
  return logits.tape()->push(std::move(v), {logits},
                             [il, probs = std::move(probs), tgt = std::move(tgt), n](Tape& t, int self) {
                               Matrix g = probs;
                               for (std::size_t c = 0; c < tgt.size(); ++c) {
                                 g(tgt[c], static_cast<Eigen::Index>(c)) -= 1.0;
                               }
                               t.accumulate(il, g * (t.out_grad(self)(0, 0) / n));
                             });
}

Var operator+(Var a, Var b) { return add(a, b); }
Var operator-(Var a, Var b) { return sub(a, b); }

}  // namespace songsmith::ad
