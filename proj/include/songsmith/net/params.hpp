#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "songsmith/core/random.hpp"
#include "songsmith/core/types.hpp"
#include "songsmith/net/autodiff.hpp"

namespace songsmith {

/// Ordered, name-addressable collection of parameters. Order is the
/// creation order and is what checkpoints and optimizers iterate over.
class ParamSet {
 public:
  Parameter& add(std::string name, Eigen::Index rows, Eigen::Index cols);
  Parameter& at(std::string_view name);
  const Parameter& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  double grad_norm() const;
  /// Rescales gradients so their global L2 norm is at most `max_norm`.
  /// Returns the pre-clip norm.
  double clip_grad_norm(double max_norm);
  bool all_finite() const;

 private:
  std::vector<Parameter> params_;
};

enum class StartTokenPolicy {
  kLearned,  // dedicated learned start embedding per branch
  kZero,     // zero vector in place of the previous-token embedding
};

struct BranchConfig {
  int embed_dim = 0;    // previous-token embedding
  int hidden_dim = 0;   // fusion ("in") layer size
  int lstm_units = 0;   // output layer size
  int output_dim = 0;   // attribute classes K
  int rse_dim = 0;      // RSE length for this branch; 0 disables RSE input
  friend bool operator==(const BranchConfig&, const BranchConfig&) = default;
};

struct ModelConfig {
  int lyric_dim = 100;
  std::array<BranchConfig, kNumAttributes> branches = {
      BranchConfig{128, 32, 64, 70, 0}, BranchConfig{64, 16, 32, 10, 0},
      BranchConfig{32, 8, 16, 5, 0}};
  int disc_hidden = 32;
  int disc_units = 64;
  /// When set, fusion-layer gates also read the other branches' previous
  /// fusion-layer states (candidate-only fusion otherwise).
  bool fused_gates = false;
  StartTokenPolicy start_policy = StartTokenPolicy::kLearned;

  const BranchConfig& branch(Attribute a) const { return branches[index_of(a)]; }
  BranchConfig& branch(Attribute a) { return branches[index_of(a)]; }
  /// Input width of a branch's fusion layer: lyric + token embedding + RSE.
  int branch_input_dim(Attribute a) const;
  int total_rse_dim() const;
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  /// Stable hex digest of the serialized config.
  std::string hash() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct GeneratorParams {
  ModelConfig config;
  ParamSet params;
};

struct DiscriminatorParams {
  ModelConfig config;
  ParamSet params;
};

/// Name of the parameter for branch `a`, e.g. "pitch.in.Wx".
std::string gen_name(Attribute a, std::string_view suffix);

/// Builds parameters with the standard shapes. `seed` drives a named init
/// stream. Recurrent matrices are orthogonal blocks, input matrices Glorot
/// uniform, forget-gate biases 1.0, everything else zero.
GeneratorParams init_generator(const ModelConfig& config, std::uint64_t seed);
DiscriminatorParams init_discriminator(const ModelConfig& config, std::uint64_t seed);

/// Sets every parameter to zero (used by tests and the fixed-point checks).
void zero_params(ParamSet& params);

}  // namespace songsmith
