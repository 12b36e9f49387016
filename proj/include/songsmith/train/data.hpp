#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "songsmith/core/corpus.hpp"
#include "songsmith/core/random.hpp"
#include "songsmith/net/generate.hpp"
#include "songsmith/train/losses.hpp"

namespace songsmith {

/// A paired sample converted to network inputs and targets.
struct EncodedSample {
  std::string id;
  Matrix lyrics;  // T x lyric_dim
  RseVector rse;  // from the sample's own style features
  std::array<std::vector<int>, kNumAttributes> classes;  // 0-based
  std::size_t length() const { return classes[0].size(); }
};

EncodedSample encode_sample(const PairedSample& sample, const ModelBundle& model);
std::vector<EncodedSample> encode_samples(std::span<const PairedSample> samples, const ModelBundle& model);

struct Batch {
  GenInputs inputs;
  /// targets[a][t][b], 0-based classes.
  std::array<std::vector<std::vector<int>>, kNumAttributes> targets;
  /// Ground-truth statistics in 1-based index space.
  std::array<SeqStats, kNumAttributes> stats;
  int size() const { return inputs.batch(); }
};

Batch make_batch(std::span<const EncodedSample> data, std::span<const std::size_t> indices,
                 const ModelConfig& config);

/// Shuffles (when `rng` is given) and chunks sample indices; each chunk
/// holds samples of a single length. Uniform-length data gives
/// ceil(n / batch_size) batches.
std::vector<std::vector<std::size_t>> plan_batches(std::span<const EncodedSample> data, int batch_size,
                                                   Rng* rng);

/// Options for assembling a fresh model from a training split.
struct ModelSetup {
  ModelConfig base;  // branch output/RSE dims and lyric_dim are overwritten
  DiscretizerRules rules;
  TokenizerOptions tokenizer;
  std::uint64_t seed = 1;
};

/// Vocabulary from `vocab_corpus` (typically the whole filtered corpus),
/// discretizers from the training split, dims derived from both.
ModelBundle build_model(std::span<const PairedSample> train, std::span<const PairedSample> vocab_corpus,
                        EmbeddingTable words, EmbeddingTable syllables, const ModelSetup& setup);

}  // namespace songsmith
