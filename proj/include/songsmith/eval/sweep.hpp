#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "songsmith/net/generate.hpp"
#include "songsmith/style/rse.hpp"

namespace songsmith {

/// Box-plot summary (Tukey whiskers at 1.5 IQR, clipped to the data).
struct DistributionSummary {
  std::size_t count = 0;
  double mean = 0, min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double lower_whisker = 0, upper_whisker = 0;
};

/// Quartiles by linear interpolation between order statistics.
DistributionSummary summarize(std::vector<double> values);

struct SweepConfig {
  Attribute attribute = Attribute::kPitch;
  StyleFeature feature = StyleFeature::kAverage;
  std::vector<double> candidates{0.2, 0.4, 0.6, 0.8};
  double fixed_value = 0.5;
  std::uint64_t seed = 1;
};

struct SweepResult {
  std::string feature;  // e.g. "pitch.avg"
  std::vector<double> candidates;
  /// Per candidate: note values of the attribute for an average sweep,
  /// per-sequence feature values for range and variance sweeps.
  std::vector<std::vector<double>> values;
  std::vector<DistributionSummary> summaries;
  /// Rank correlation of candidate level vs per-candidate mean; absent
  /// when undefined (single candidate or constant means).
  std::optional<double> spearman;
};

/// Generates one melody per lyric for each candidate. Lyric i uses the same
/// noise seed for every candidate.
SweepResult controllability_sweep(const ModelBundle& model, const std::vector<LyricsSequence>& lyrics,
                                  const SweepConfig& config);

}  // namespace songsmith
