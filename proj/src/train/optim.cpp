#include "songsmith/train/optim.hpp"

#include <cmath>

namespace songsmith {

Adam::Adam(const ParamSet& params, AdamConfig config) : config_(config) {
  for (const auto& p : params.all()) {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void Adam::step(ParamSet& params) {
  auto& all = params.all();
  if (all.size() != m_.size()) throw Error("adam: parameter count changed");
  ++steps_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& p = all[i];
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * p.grad;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= config_.learning_rate * (m_[i].array() / c1) /
                       ((v_[i].array() / c2).sqrt() + config_.epsilon);
  }
}

void Adam::restore(long steps, std::vector<Matrix> m, std::vector<Matrix> v) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw Error("adam: moment count mismatch");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].rows() != m_[i].rows() || m[i].cols() != m_[i].cols() ||
        v[i].rows() != v_[i].rows() || v[i].cols() != v_[i].cols()) {
      throw Error("adam: moment shape mismatch");
    }
  }
  steps_ = steps;
  m_ = std::move(m);
  v_ = std::move(v);
}

}  // namespace songsmith
