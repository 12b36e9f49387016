#pragma once

#include <array>
#include <functional>
#include <span>
#include <vector>

#include "songsmith/net/autodiff.hpp"
#include "songsmith/net/params.hpp"

namespace songsmith {

/// Conditioning inputs for a batch of B sequences of common length T.
/// Network code uses 0-based class rows; vocabularies use 1-based indices.
struct GenInputs {
  std::vector<Matrix> lyrics;                 // T entries, lyric_dim x B
  std::array<Matrix, kNumAttributes> rse;     // rse_dim(a) x B, constant over time
  int length() const { return static_cast<int>(lyrics.size()); }
  int batch() const { return lyrics.empty() ? 0 : static_cast<int>(lyrics.front().cols()); }
};

/// Parameter leaves of one generator on one tape.
class GeneratorBinding {
 public:
  GeneratorBinding(ad::Tape& tape, GeneratorParams& params);
  /// Read-only binding: parameters enter the tape as constants.
  GeneratorBinding(ad::Tape& tape, const GeneratorParams& params);
  ad::Var operator()(Attribute a, std::string_view suffix) const;
  ad::Tape& tape() const { return *tape_; }
  const ModelConfig& config() const { return *config_; }

 private:
  ad::Tape* tape_;
  const ModelConfig* config_;
  const ParamSet* params_;
  std::vector<ad::Var> vars_;
};

struct BranchState {
  ad::Var c_in, h_in, c_out, h_out;
};

struct MemofuState {
  std::array<BranchState, kNumAttributes> branch;
  const BranchState& operator[](Attribute a) const { return branch[index_of(a)]; }
};

MemofuState zero_state(const GeneratorBinding& g, int batch);

struct StepOutput {
  MemofuState state;
  std::array<ad::Var, kNumAttributes> logits;  // K_a x B
};

/// One generator step. `prev_tokens[a]` is a K_a x B one-hot (or simplex)
/// matrix of the previous tokens, or an invalid Var for the start position.
StepOutput memofu_step(const GeneratorBinding& g, const MemofuState& state, ad::Var x_t,
                       const std::array<ad::Var, kNumAttributes>& prev_tokens,
                       const std::array<ad::Var, kNumAttributes>& rse);

/// What a sampler returns for one attribute at one step.
struct TokenSample {
  ad::Var soft;             // K x B distribution, differentiable
  ad::Var token;            // forward value = hard one-hot; gradient to `soft`
  std::vector<int> classes; // 0-based argmax per column
};

/// Token sampler: (logits, attribute, step) -> sample.
using TokenSampler = std::function<TokenSample(ad::Var logits, Attribute a, int t)>;

struct Rollout {
  std::array<std::vector<ad::Var>, kNumAttributes> logits;
  std::array<std::vector<ad::Var>, kNumAttributes> soft;
  std::array<std::vector<ad::Var>, kNumAttributes> tokens;
  /// classes[a][t][b], 0-based.
  std::array<std::vector<std::vector<int>>, kNumAttributes> classes;
};

/// Autoregressive rollout over inputs.length() steps. The fed-back tokens
/// are constants (hard one-hots), so gradients reach the parameters only
/// through each step's own sample.
Rollout generator_rollout(const GeneratorBinding& g, const GenInputs& inputs,
                          const TokenSampler& sampler);

/// Teacher-forced logits: step t consumes the ground-truth tokens of t-1.
/// `targets[a][t][b]` are 0-based classes.
std::array<std::vector<ad::Var>, kNumAttributes> teacher_forced_logits(
    const GeneratorBinding& g, const GenInputs& inputs,
    const std::array<std::vector<std::vector<int>>, kNumAttributes>& targets);

/// K x B one-hot matrix of 0-based classes.
Matrix one_hot(std::span<const int> classes, int k);

}  // namespace songsmith
