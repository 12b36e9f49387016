#pragma once

#include <array>
#include <vector>

#include "songsmith/net/autodiff.hpp"
#include "songsmith/net/memofu.hpp"
#include "songsmith/net/params.hpp"

namespace songsmith {

class DiscriminatorBinding {
 public:
  DiscriminatorBinding(ad::Tape& tape, DiscriminatorParams& params);
  ad::Var operator()(std::string_view name) const;
  ad::Tape& tape() const { return *tape_; }
  const ModelConfig& config() const { return *config_; }

 private:
  ad::Tape* tape_;
  const ModelConfig* config_;
  const ParamSet* params_;
  std::vector<ad::Var> vars_;
};

/// One logit per sequence (1 x B). `tokens[a][t]` is a K_a x B matrix of
/// one-hot or simplex columns; both are embedded by matrix product.
ad::Var discriminator_score(const DiscriminatorBinding& d,
                            const std::array<std::vector<ad::Var>, kNumAttributes>& tokens,
                            const GenInputs& inputs);

}  // namespace songsmith
