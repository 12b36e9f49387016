#include "songsmith/style/features.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace songsmith {

std::string_view feature_name(StyleFeature f) {
  switch (f) {
    case StyleFeature::kRange: return "range";
    case StyleFeature::kAverage: return "avg";
    case StyleFeature::kVariance: return "var";
  }
  return "?";
}

StyleFeature parse_feature(std::string_view name) {
  if (name == "range" || name == "rng") return StyleFeature::kRange;
  if (name == "avg" || name == "average") return StyleFeature::kAverage;
  if (name == "var" || name == "variance") return StyleFeature::kVariance;
  throw Error("unknown style feature '" + std::string(name) + "'");
}

std::string feature_code(Attribute a, StyleFeature f) {
  static constexpr char kAttr[] = {'P', 'D', 'R'};
  static constexpr char kFeat[] = {'R', 'A', 'V'};
  return {kAttr[index_of(a)], kFeat[static_cast<int>(f)]};
}

double AttributeStats::get(StyleFeature f) const {
  switch (f) {
    case StyleFeature::kRange: return range;
    case StyleFeature::kAverage: return average;
    case StyleFeature::kVariance: return variance;
  }
  return 0.0;
}

double& AttributeStats::get(StyleFeature f) {
  switch (f) {
    case StyleFeature::kRange: return range;
    case StyleFeature::kAverage: return average;
    case StyleFeature::kVariance: break;
  }
  return variance;
}

std::array<double, 9> StyleFeatures::flat() const {
  std::array<double, 9> out{};
  std::size_t i = 0;
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : kAllFeatures) out[i++] = get(a, f);
  }
  return out;
}

AttributeStats sequence_stats(std::span<const double> values) {
  if (values.size() < 2) {
    throw Error("style features need at least 2 notes (variance undefined)");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {*hi - *lo, mean, ss / static_cast<double>(values.size() - 1)};
}

StyleFeatures extract_style_features(const MelodySequence& melody) {
  StyleFeatures out;
  for (Attribute a : kAllAttributes) {
    const auto values = melody.values(a);
    out[a] = sequence_stats(values);
  }
  return out;
}

}  // namespace songsmith
