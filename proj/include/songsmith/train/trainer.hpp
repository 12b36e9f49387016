#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "songsmith/net/checkpoint.hpp"
#include "songsmith/train/data.hpp"
#include "songsmith/train/optim.hpp"

namespace songsmith {

/// Generator objective in the adversarial phase.
enum class LossMode {
  kRsganSeqloss,  // RSGAN + per-attribute SeqLoss (default)
  kRsganOnly,
  kRsganCe,       // RSGAN + teacher-forced cross-entropy
};

std::string loss_mode_name(LossMode m);
LossMode parse_loss_mode(std::string_view name);

struct TrainConfig {
  int pretrain_epochs = 40;
  int adversarial_epochs = 120;
  int batch_size = 512;
  double pretrain_lr = 1e-3;
  double generator_lr = 1e-4;
  double discriminator_lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.99;
  double grad_clip = 5.0;
  double tau_max = 1000.0;
  /// Multiply logits by tau instead of dividing.
  bool inverse_temperature = false;
  SeqLossWeights seqloss;
  double ce_weight = 1.0;  // only in kRsganCe mode
  LossMode mode = LossMode::kRsganSeqloss;
  std::uint64_t seed = 1;
  int checkpoint_every = 0;  // epochs; 0 disables periodic checkpoints
  std::filesystem::path checkpoint_dir;
  std::filesystem::path log_path;
  /// Validation sequences scored per epoch (0 disables validation).
  std::size_t validation_limit = 200;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are rejected.
  static TrainConfig from_json(const nlohmann::json& j);
  void validate() const;
};

/// One line of the training log.
struct EpochRecord {
  std::string phase;   // "pretrain" or "adversarial"
  std::string mode;    // loss mode of adversarial epochs
  int epoch = 0;       // index within the phase
  int global_epoch = 0;
  int steps = 0;
  double ce = 0;
  double g_loss = 0, d_loss = 0, tau = 0;
  std::array<double, kNumAttributes> seqloss{};
  std::vector<double> self_bleu;  // orders 1..4 on validation output
  std::vector<double> style_mse;  // nine values, PR..RV
  nlohmann::json to_json() const;
  static EpochRecord from_json(const nlohmann::json& j);
};

/// Raised on a non-finite loss or parameter; carries the snapshot path.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class Trainer {
 public:
  Trainer(ModelBundle& model, TrainConfig config, std::vector<EncodedSample> train,
          std::vector<EncodedSample> valid, std::vector<MelodySequence> valid_melodies = {});

  /// One pass of teacher-forced CE over the training split; mean CE per step.
  double ce_pretrain_epoch();
  /// One adversarial pass at the temperature scheduled for `epoch`.
  EpochRecord adversarial_epoch(int epoch);

  /// Runs the remaining schedule. `on_epoch` sees every finished record.
  void train(const std::function<void(const EpochRecord&)>& on_epoch = {});

  int pretrain_done() const { return pretrain_done_; }
  int adversarial_done() const { return adversarial_done_; }
  const std::vector<EpochRecord>& history() const { return history_; }
  const TrainConfig& config() const { return config_; }

  TrainSnapshot snapshot() const;
  void restore(const TrainSnapshot& snap);
  void save(const std::filesystem::path& path) const;

 private:
  void validate_epoch(EpochRecord& rec) const;
  void finish_epoch(EpochRecord rec, const std::function<void(const EpochRecord&)>& on_epoch);
  void guard(double value, const char* what);

  ModelBundle& model_;
  TrainConfig config_;
  std::vector<EncodedSample> train_, valid_;
  std::vector<MelodySequence> valid_melodies_;
  Adam pre_, gen_, disc_;
  Rng shuffle_rng_, gumbel_rng_;
  int pretrain_done_ = 0, adversarial_done_ = 0;
  std::vector<EpochRecord> history_;
};

}  // namespace songsmith
