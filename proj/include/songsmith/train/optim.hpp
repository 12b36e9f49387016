#pragma once

#include <vector>

#include <json.hpp>

#include "songsmith/net/params.hpp"

namespace songsmith {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double epsilon = 1e-8;
};

/// Adam with bias correction. Moments are kept per parameter, in ParamSet order.
class Adam {
 public:
  Adam() = default;
  Adam(const ParamSet& params, AdamConfig config);

  void step(ParamSet& params);
  const AdamConfig& config() const { return config_; }
  void set_learning_rate(double lr) { config_.learning_rate = lr; }
  long steps() const { return steps_; }

  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  /// Restores moments and the step counter (checkpoint resume).
  void restore(long steps, std::vector<Matrix> m, std::vector<Matrix> v);

 private:
  AdamConfig config_;
  long steps_ = 0;
  std::vector<Matrix> m_, v_;
};

}  // namespace songsmith
