#pragma once

#include "songsmith/core/random.hpp"
#include "songsmith/net/memofu.hpp"

namespace songsmith {

/// K x B matrix of standard Gumbel draws, column by column.
Matrix gumbel_noise(Eigen::Index rows, Eigen::Index cols, Rng& rng);

/// soft = softmax((logits + noise) / tau); hard = one-hot argmax(soft).
/// With `inverse` set, tau multiplies instead of divides.
TokenSample gumbel_softmax_st(ad::Var logits, double tau, const Matrix& noise, bool inverse = false);

/// Argmax per column, first index on ties.
std::vector<int> argmax_cols(const Matrix& m);

/// Fresh Gumbel noise per call drawn from `rng` (which must outlive the sampler).
TokenSampler gumbel_sampler(double tau, Rng& rng, bool inverse = false);
/// Noise-free: soft = softmax(logits), hard = argmax.
TokenSampler greedy_sampler();
/// Replays a fixed noise table noise[a][t] (tests and gradient checks).
TokenSampler frozen_noise_sampler(double tau, std::array<std::vector<Matrix>, kNumAttributes> noise);

/// tau(e) = tau_max^(e / (E - 1)) for epochs e = 0..E-1; 1 when E <= 1.
double temperature_at(int epoch, int epochs, double tau_max);

}  // namespace songsmith
