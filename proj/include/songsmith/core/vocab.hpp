#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "songsmith/core/types.hpp"

namespace songsmith {

/// Ordered value set of one attribute. Class indices run 1..K.
class AttributeVocab {
 public:
  AttributeVocab() = default;
  AttributeVocab(Attribute attribute, std::vector<double> values);
  /// Contiguous integer range [lo, hi], used for pitch.
  static AttributeVocab contiguous(Attribute attribute, int lo, int hi);

  Attribute attribute() const { return attribute_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  /// 1-based class index of `value`, or nullopt when not representable.
  std::optional<int> find(double value) const;
  /// Like find() but throws Error naming the attribute.
  int index_of(double value) const;
  double value_at(int index) const;
  /// Class index of the value closest to `value` (used to snap MIDI timings).
  int nearest_index(double value) const;

  friend bool operator==(const AttributeVocab&, const AttributeVocab&) = default;

 private:
  Attribute attribute_ = Attribute::kPitch;
  std::vector<double> values_;
};

struct VocabSet {
  std::array<AttributeVocab, kNumAttributes> vocabs;

  const AttributeVocab& operator[](Attribute a) const { return vocabs[index_of(a)]; }
  std::array<int, kNumAttributes> sizes() const;

  /// Per-attribute 1-based class indices of a melody; throws on overflow.
  std::array<std::vector<int>, kNumAttributes> encode(const MelodySequence& m) const;
  MelodySequence decode(std::span<const int> pitch, std::span<const int> duration,
                        std::span<const int> rest) const;
  bool representable(const MelodySequence& m) const;

  nlohmann::json to_json() const;
  static VocabSet from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static VocabSet load(const std::filesystem::path& path);
  friend bool operator==(const VocabSet&, const VocabSet&) = default;
};

/// Pitch: contiguous range covering observed pitches. Duration and rest:
/// sorted distinct observed values.
VocabSet build_vocab(std::span<const MelodySequence> melodies);

}  // namespace songsmith
