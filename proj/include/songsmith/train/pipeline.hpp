#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include <json.hpp>

#include "songsmith/train/trainer.hpp"

namespace songsmith {

/// File-driven training run (the `train` subcommand).
struct RunConfig {
  std::filesystem::path train_corpus;
  std::filesystem::path valid_corpus;
  /// Extra corpus consulted only for vocabulary coverage (e.g. the full
  /// filtered corpus, so test values stay representable).
  std::filesystem::path vocab_corpus;
  CorpusFormat format = CorpusFormat::kRecords;
  std::filesystem::path word_embeddings;
  std::filesystem::path syllable_embeddings;
  ModelConfig model;
  DiscretizerRules rules;
  TokenizerOptions tokenizer;
  TrainConfig train;
  std::uint64_t init_seed = 1;
  std::filesystem::path output_dir = "run";
  std::filesystem::path resume;  // checkpoint to continue from

  /// Relative paths are resolved against `base_dir`.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  nlohmann::json to_json() const;
};

struct RunResult {
  std::filesystem::path final_checkpoint;
  std::vector<EpochRecord> history;
  std::size_t train_size = 0, valid_size = 0;
};

RunResult run_training(const RunConfig& config,
                       const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Sets a dotted path ("train.batch_size") inside a JSON document from
/// "key=value"; the value is parsed as JSON when possible, else as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

}  // namespace songsmith
