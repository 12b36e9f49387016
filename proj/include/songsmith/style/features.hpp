#pragma once

#include <array>
#include <span>
#include <string_view>

#include "songsmith/core/types.hpp"

namespace songsmith {

enum class StyleFeature { kRange = 0, kAverage = 1, kVariance = 2 };

inline constexpr std::array<StyleFeature, 3> kAllFeatures = {
    StyleFeature::kRange, StyleFeature::kAverage, StyleFeature::kVariance};

std::string_view feature_name(StyleFeature f);
StyleFeature parse_feature(std::string_view name);

/// Short axis label, e.g. "PR" for pitch range, "DV" for duration variance.
std::string feature_code(Attribute a, StyleFeature f);

struct AttributeStats {
  double range = 0.0;
  double average = 0.0;
  double variance = 0.0;  // sample variance, divisor T-1

  double get(StyleFeature f) const;
  double& get(StyleFeature f);
  friend bool operator==(const AttributeStats&, const AttributeStats&) = default;
};

/// Range, average and sample variance of each attribute of one melody.
struct StyleFeatures {
  std::array<AttributeStats, kNumAttributes> stats;

  const AttributeStats& operator[](Attribute a) const { return stats[index_of(a)]; }
  AttributeStats& operator[](Attribute a) { return stats[index_of(a)]; }
  double get(Attribute a, StyleFeature f) const { return (*this)[a].get(f); }
  /// The nine values ordered PR, PA, PV, DR, DA, DV, RR, RA, RV.
  std::array<double, 9> flat() const;
  friend bool operator==(const StyleFeatures&, const StyleFeatures&) = default;
};

/// Statistics of a plain value series. Throws Error when fewer than 2 values.
AttributeStats sequence_stats(std::span<const double> values);

StyleFeatures extract_style_features(const MelodySequence& melody);

}  // namespace songsmith
