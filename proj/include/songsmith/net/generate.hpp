#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "songsmith/net/checkpoint.hpp"
#include "songsmith/net/memofu.hpp"

namespace songsmith {

/// Stacks per-sample lyric embeddings (T x D each, equal T) and RSE vectors
/// into batched generator inputs.
GenInputs make_inputs(std::span<const Matrix* const> lyrics, std::span<const RseVector* const> rse,
                      const ModelConfig& config);

struct GenerationItem {
  LyricsSequence lyrics;
  RseVector rse;
  std::uint64_t seed = 0;  // per-item noise seed
};

struct GenerationOutput {
  MelodySequence melody;
  /// 1-based class indices per attribute.
  std::array<std::vector<int>, kNumAttributes> classes;
  int oov_count = 0;
};

/// Samples one melody per item (Gumbel-max, i.e. exact categorical draws
/// from the softmax). Each item's noise comes only from its own seed, so an
/// item's result does not depend on the batch it is generated in.
std::vector<GenerationOutput> generate(const ModelBundle& model, std::span<const GenerationItem> items);

/// Argmax decoding, no noise.
std::vector<GenerationOutput> generate_greedy(const ModelBundle& model,
                                              std::span<const GenerationItem> items);

}  // namespace songsmith
