#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "songsmith/core/types.hpp"
#include "songsmith/style/features.hpp"

namespace songsmith {

enum class RepetitionStrategy {
  kEarlierOccurrence,  // positions whose n-gram already occurred earlier
  kDistinctRepeated,   // distinct n-grams occurring at least twice
};

struct MelodyMetrics {
  double midi_span = 0;
  double two_midi_reps = 0;
  double three_midi_reps = 0;
  double unique_midi = 0;
  double restless_notes = 0;
  double avg_rest = 0;
  double song_length = 0;

  static constexpr std::array<const char*, 7> kColumns = {
      "MIDI Span", "2-MIDI Reps", "3-MIDI Reps", "Unique MIDI", "Restless", "Avg Rest", "Song Length"};
  std::array<double, 7> values() const {
    return {midi_span, two_midi_reps, three_midi_reps, unique_midi, restless_notes, avg_rest, song_length};
  }
};

/// Pitch n-gram repetitions of one sequence.
int count_repetitions(std::span<const int> pitches, int n, RepetitionStrategy strategy);

MelodyMetrics sequence_metrics(const MelodySequence& m,
                               RepetitionStrategy strategy = RepetitionStrategy::kEarlierOccurrence);
/// Per-sequence metrics averaged over the corpus. Throws on an empty corpus.
MelodyMetrics compute_metrics(std::span<const MelodySequence> corpus,
                              RepetitionStrategy strategy = RepetitionStrategy::kEarlierOccurrence);

/// Nine per-feature MSEs, ordered PR, PA, PV, DR, DA, DV, RR, RA, RV.
std::array<double, 9> style_mse(std::span<const MelodySequence> generated,
                                std::span<const MelodySequence> reference);

std::array<std::string, 9> style_axis_labels();

/// Spearman rank correlation with average ranks for ties. Absent when
/// fewer than two points or when either side has zero rank variance.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

}  // namespace songsmith
