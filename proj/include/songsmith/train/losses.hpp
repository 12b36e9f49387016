#pragma once

#include <array>
#include <span>
#include <vector>

#include "songsmith/net/autodiff.hpp"
#include "songsmith/core/types.hpp"

namespace songsmith {

/// Per-column expected class index (1..K) of each step, averaged over
/// steps: 1 x B.
ad::Var seq_mean(std::span<const ad::Var> probs);
/// Sample variance (divisor T-1) of the per-step expected indices: 1 x B.
ad::Var seq_var(std::span<const ad::Var> probs);

/// Ground-truth index-space statistics, one column per batch element.
struct SeqStats {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd var;
};

/// Mean and sample variance of 1-based class sequences: seqs[b][t].
SeqStats index_stats(const std::vector<std::vector<int>>& seqs);

struct SeqLossWeights {
  double alpha1 = 1.0;  // mean term
  double alpha2 = 1.0;  // variance term
};

/// alpha1 * mean_b (m_hat - m)^2 + alpha2 * mean_b (v_hat - v)^2.
ad::Var seqloss(std::span<const ad::Var> probs, const SeqStats& target, const SeqLossWeights& w);

struct RsganLosses {
  ad::Var d_loss;
  ad::Var g_loss;
};

/// d = mean softplus(-(C_r - C_f)), g = mean softplus(-(C_f - C_r)).
RsganLosses rsgan_losses(ad::Var real_logits, ad::Var fake_logits);

/// Mean over steps of the per-step cross-entropy; targets[t][b] 0-based.
ad::Var sequence_cross_entropy(std::span<const ad::Var> logits,
                               const std::vector<std::vector<int>>& targets);

}  // namespace songsmith
