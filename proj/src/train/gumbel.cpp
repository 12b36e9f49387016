#include "songsmith/train/gumbel.hpp"

#include <cmath>
#include <memory>

namespace songsmith {

Matrix gumbel_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) g(r, c) = rng.gumbel();
  }
  return g;
}

std::vector<int> argmax_cols(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    Eigen::Index best = 0;
    for (Eigen::Index r = 1; r < m.rows(); ++r) {
      if (m(r, c) > m(best, c)) best = r;
    }
    out[static_cast<std::size_t>(c)] = static_cast<int>(best);
  }
  return out;
}

TokenSample gumbel_softmax_st(ad::Var logits, double tau, const Matrix& noise, bool inverse) {
  if (!(tau > 0.0)) throw Error("gumbel softmax: temperature must be positive");
  if (!logits.value().allFinite()) throw Error("gumbel softmax: non-finite logits");
  if (noise.rows() != logits.rows() || noise.cols() != logits.cols()) {
    throw Error("gumbel softmax: noise shape mismatch");
  }
  ad::Tape& tape = *logits.tape();
  const double factor = inverse ? tau : 1.0 / tau;
  const ad::Var soft = ad::softmax_cols(ad::scale(ad::add(logits, tape.constant(noise)), factor));
  TokenSample s;
  s.classes = argmax_cols(soft.value());
  s.soft = soft;
  s.token = ad::straight_through(soft, one_hot(s.classes, static_cast<int>(logits.rows())));
  return s;
}

TokenSampler gumbel_sampler(double tau, Rng& rng, bool inverse) {
  return [tau, &rng, inverse](ad::Var logits, Attribute, int) {
    return gumbel_softmax_st(logits, tau, gumbel_noise(logits.rows(), logits.cols(), rng), inverse);
  };
}

TokenSampler greedy_sampler() {
  return [](ad::Var logits, Attribute, int) {
    return gumbel_softmax_st(logits, 1.0, Matrix::Zero(logits.rows(), logits.cols()));
  };
}

TokenSampler frozen_noise_sampler(double tau, std::array<std::vector<Matrix>, kNumAttributes> noise) {
  auto table = std::make_shared<const std::array<std::vector<Matrix>, kNumAttributes>>(std::move(noise));
  return [tau, table](ad::Var logits, Attribute a, int t) {
    return gumbel_softmax_st(logits, tau, (*table)[index_of(a)].at(static_cast<std::size_t>(t)));
  };
}

double temperature_at(int epoch, int epochs, double tau_max) {
  if (epochs <= 1) return 1.0;
  return std::pow(tau_max, static_cast<double>(epoch) / static_cast<double>(epochs - 1));
}

}  // namespace songsmith
