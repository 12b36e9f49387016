#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace songsmith {

/// The three note attributes predicted by the generator, one branch each.
enum class Attribute { kPitch = 0, kDuration = 1, kRest = 2 };

inline constexpr std::size_t kNumAttributes = 3;
inline constexpr std::array<Attribute, kNumAttributes> kAllAttributes = {
    Attribute::kPitch, Attribute::kDuration, Attribute::kRest};

std::string_view attribute_name(Attribute a);
Attribute parse_attribute(std::string_view name);

inline std::size_t index_of(Attribute a) { return static_cast<std::size_t>(a); }

/// Raised for malformed input files, bad records and bad user parameters.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A user-facing validation failure that names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& what)
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// One note: MIDI pitch, sounding length and the rest that follows it.
/// Lengths are in quarter notes.
struct NoteEvent {
  int pitch = 60;
  double duration = 1.0;
  double rest = 0.0;

  double value(Attribute a) const {
    switch (a) {
      case Attribute::kPitch: return pitch;
      case Attribute::kDuration: return duration;
      case Attribute::kRest: return rest;
    }
    return 0.0;
  }
  friend bool operator==(const NoteEvent&, const NoteEvent&) = default;
};

struct MelodySequence {
  std::vector<NoteEvent> notes;

  std::size_t size() const { return notes.size(); }
  bool empty() const { return notes.empty(); }
  std::vector<double> values(Attribute a) const;
  /// Sum of duration + rest over all notes, in quarter notes.
  double total_length() const;
  friend bool operator==(const MelodySequence&, const MelodySequence&) = default;
};

/// Syllable token stream grouped into words. `word_spans[w]` is the
/// half-open syllable interval [first, second) of word w.
struct LyricsSequence {
  std::vector<std::string> syllables;
  std::vector<std::pair<std::size_t, std::size_t>> word_spans;

  std::size_t size() const { return syllables.size(); }
  /// Text of the word containing each syllable (syllables joined).
  std::vector<std::string> word_of_each_syllable() const;
  /// Throws Error if spans are not contiguous, ordered and covering.
  void validate() const;
  friend bool operator==(const LyricsSequence&, const LyricsSequence&) = default;
};

}  // namespace songsmith
