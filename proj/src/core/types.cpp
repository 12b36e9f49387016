#include "songsmith/core/types.hpp"

#include <numeric>

namespace songsmith {

std::string_view attribute_name(Attribute a) {
  switch (a) {
    case Attribute::kPitch: return "pitch";
    case Attribute::kDuration: return "duration";
    case Attribute::kRest: return "rest";
  }
  return "?";
}

Attribute parse_attribute(std::string_view name) {
  if (name == "pitch" || name == "p") return Attribute::kPitch;
  if (name == "duration" || name == "d") return Attribute::kDuration;
  if (name == "rest" || name == "r") return Attribute::kRest;
  throw Error("unknown attribute '" + std::string(name) + "'");
}

std::vector<double> MelodySequence::values(Attribute a) const {
  std::vector<double> out;
  out.reserve(notes.size());
  for (const auto& n : notes) out.push_back(n.value(a));
  return out;
}

double MelodySequence::total_length() const {
  return std::accumulate(notes.begin(), notes.end(), 0.0,
                         [](double acc, const NoteEvent& n) { return acc + n.duration + n.rest; });
}

std::vector<std::string> LyricsSequence::word_of_each_syllable() const {
  std::vector<std::string> out(syllables.size());
  for (const auto& [first, last] : word_spans) {
    std::string word;
    for (std::size_t i = first; i < last; ++i) word += syllables[i];
    for (std::size_t i = first; i < last; ++i) out[i] = word;
  }
  return out;
}

void LyricsSequence::validate() const {
  std::size_t expected = 0;
  for (const auto& [first, last] : word_spans) {
    if (first != expected || last <= first) {
      throw Error("word spans must be contiguous, ordered and non-empty");
    }
    expected = last;
  }
  if (expected != syllables.size()) {
    throw Error("word spans cover " + std::to_string(expected) + " of " +
                std::to_string(syllables.size()) + " syllables");
  }
}

}  // namespace songsmith
