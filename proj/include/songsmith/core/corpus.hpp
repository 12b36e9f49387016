#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "songsmith/core/types.hpp"
#include "songsmith/core/vocab.hpp"
#include "songsmith/style/features.hpp"

namespace songsmith {

struct PairedSample {
  std::string id;
  LyricsSequence lyrics;
  MelodySequence melody;
  StyleFeatures style;  // cached at ingestion
};

/// Builds a sample, validating alignment and computing the style cache.
PairedSample make_sample(std::string id, LyricsSequence lyrics, MelodySequence melody);

enum class CorpusFormat {
  kRecords,  // songsmith line-delimited JSON records
  kPaired,   // [notes, syllables, words] triples, the layout of the published dataset export
};

CorpusFormat parse_corpus_format(std::string_view name);

struct IngestLogEntry {
  std::size_t record = 0;  // 0-based record index
  std::size_t line = 0;    // 1-based line number, 0 when not line-oriented
  std::string reason;
};

struct IngestResult {
  std::vector<PairedSample> samples;
  std::vector<IngestLogEntry> skipped;
  std::size_t records_seen = 0;
};

struct IngestOptions {
  /// When set, values that the vocabulary cannot represent skip the record.
  std::optional<VocabSet> vocab;
  /// Throw on the first bad record instead of logging it.
  bool strict = false;
};

/// Reads a corpus file. Throws Error when the file is unreadable.
IngestResult ingest_corpus(const std::filesystem::path& path, CorpusFormat format,
                           const IngestOptions& options = {});

/// Writes samples in the line-delimited record format (deterministic bytes).
void write_corpus(std::span<const PairedSample> samples, const std::filesystem::path& path);

/// Inclusive acceptance bounds on style statistics, in attribute units.
struct FilterBounds {
  double pitch_range_min = 0, pitch_range_max = 48;
  double pitch_avg_min = 36, pitch_avg_max = 84;
  double duration_range_min = 0, duration_range_max = 8;
  double duration_avg_min = 0, duration_avg_max = 4;
  double rest_range_min = 0, rest_range_max = 8;
};

bool passes_filter(const StyleFeatures& style, const FilterBounds& bounds = {});
std::vector<PairedSample> filter_dataset(std::span<const PairedSample> samples,
                                         const FilterBounds& bounds = {});

struct DatasetSplit {
  std::vector<PairedSample> train, valid, test;
  std::uint64_t seed = 0;
};

/// Deterministic shuffled partition. Sizes: round(n*r0/sum), round(n*r1/sum),
/// remainder. Throws Error for fewer than 10 samples.
DatasetSplit split_dataset(std::span<const PairedSample> samples, std::uint64_t seed,
                           std::array<int, 3> ratios = {8, 1, 1});

struct ToyCorpusConfig {
  std::size_t count = 600;
  std::size_t length = 20;
  std::uint64_t seed = 1;
  int pitch_center_min = 54;
  int pitch_center_max = 74;
  /// Probability of the complex-rhythm regime; the rest use the simple one.
  double complex_rhythm_share = 0.5;
};

/// Synthetic paired corpus with two rhythm regimes and a continuous pitch
/// centre, so every pipeline stage can run without the published data.
std::vector<PairedSample> make_toy_corpus(const ToyCorpusConfig& config);

}  // namespace songsmith
