#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "songsmith/core/types.hpp"
#include "songsmith/core/vocab.hpp"

namespace songsmith {

inline constexpr int kTicksPerQuarter = 480;
inline constexpr double kDefaultTempoBpm = 120.0;

/// Single-track (format 0) Standard MIDI File. Note t starts at the
/// cumulative sum of (duration + rest) of the notes before it. When
/// `syllables` is non-empty, one lyric meta event precedes each note.
std::vector<std::uint8_t> melody_to_midi(const MelodySequence& melody,
                                         double tempo_bpm = kDefaultTempoBpm,
                                         std::span<const std::string> syllables = {});

void export_midi(const MelodySequence& melody, double tempo_bpm,
                 const std::filesystem::path& out,
                 std::span<const std::string> syllables = {});

struct MidiNote {
  int pitch = 0;
  std::int64_t on_tick = 0;
  std::int64_t off_tick = 0;
};

struct MidiTrackData {
  int ticks_per_quarter = kTicksPerQuarter;
  double tempo_bpm = kDefaultTempoBpm;
  std::vector<MidiNote> notes;  // ordered by onset
  std::int64_t end_tick = 0;
};

MidiTrackData parse_midi(std::span<const std::uint8_t> bytes);

/// Rebuilds a monophonic melody from MIDI: duration = off - on, rest = gap to
/// the next onset (or to end of track for the last note). With a vocabulary,
/// values snap to the nearest representable class.
MelodySequence midi_to_melody(std::span<const std::uint8_t> bytes,
                              const std::optional<VocabSet>& vocab = std::nullopt);
MelodySequence import_midi(const std::filesystem::path& path,
                           const std::optional<VocabSet>& vocab = std::nullopt);

}  // namespace songsmith
