#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "songsmith/style/features.hpp"

namespace songsmith {

/// Uniform-width k-bin discretizer over the observed [min, max] of one
/// feature. Bins are left-closed; values outside the range clamp to the
/// edge bins.
class FeatureDiscretizer {
 public:
  FeatureDiscretizer() = default;
  FeatureDiscretizer(Attribute attribute, StyleFeature feature, int bins, double min, double max);

  Attribute attribute() const { return attribute_; }
  StyleFeature feature() const { return feature_; }
  int bins() const { return bins_; }
  double min() const { return min_; }
  double max() const { return max_; }
  std::vector<double> edges() const;

  /// 0-based bin index of a feature value.
  int bin_of(double value) const;
  /// Linear map of a [0,1] control onto [min, max].
  double denormalize(double normalized) const { return min_ + normalized * (max_ - min_); }
  double normalize(double value) const;

  friend bool operator==(const FeatureDiscretizer&, const FeatureDiscretizer&) = default;

 private:
  Attribute attribute_ = Attribute::kPitch;
  StyleFeature feature_ = StyleFeature::kRange;
  int bins_ = 1;
  double min_ = 0.0, max_ = 0.0;
};

/// Bin-count rules. Range bins = round(max - min) of the observed ranges;
/// pitch average bins = round(max - min) of the observed averages.
struct DiscretizerRules {
  int duration_avg_bins = 10;
  int rest_avg_bins = 10;
  std::array<int, kNumAttributes> variance_bins = {30, 20, 20};
};

class DiscretizerSet {
 public:
  const FeatureDiscretizer& at(Attribute a, StyleFeature f) const {
    return table_[index_of(a)][static_cast<std::size_t>(f)];
  }
  FeatureDiscretizer& at(Attribute a, StyleFeature f) {
    return table_[index_of(a)][static_cast<std::size_t>(f)];
  }
  /// Length of the RSE vector of one branch.
  int rse_dim(Attribute a) const;
  std::array<int, kNumAttributes> rse_dims() const;

  const std::vector<std::string>& warnings() const { return warnings_; }
  std::vector<std::string>& warnings() { return warnings_; }

  nlohmann::json to_json() const;
  static DiscretizerSet from_json(const nlohmann::json& j);
  friend bool operator==(const DiscretizerSet& a, const DiscretizerSet& b) {
    return a.table_ == b.table_;
  }

 private:
  std::array<std::array<FeatureDiscretizer, 3>, kNumAttributes> table_;
  std::vector<std::string> warnings_;
};

/// Fits the nine discretizers on training-split style features. A degenerate
/// feature (max == min) gets a single bin and a warning.
DiscretizerSet fit_discretizers(std::span<const StyleFeatures> train_features,
                                const DiscretizerRules& rules = {});

/// Per branch: [onehot(range), onehot(avg), onehot(var)].
struct RseVector {
  std::array<std::vector<double>, kNumAttributes> branch;
  std::array<std::array<int, 3>, kNumAttributes> bins{};  // selected 0-based bins

  const std::vector<double>& operator[](Attribute a) const { return branch[index_of(a)]; }
  friend bool operator==(const RseVector&, const RseVector&) = default;
};

RseVector build_rse(const StyleFeatures& features, const DiscretizerSet& discretizers);

/// Nine normalized controls in [0,1], ordered PR, PA, PV, DR, DA, DV, RR, RA, RV.
struct StyleControls {
  std::array<double, 9> values{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5};

  double get(Attribute a, StyleFeature f) const { return values[slot(a, f)]; }
  void set(Attribute a, StyleFeature f, double v) { values[slot(a, f)] = v; }
  /// Applies "pitch.avg=0.9"-style assignments.
  void assign(std::string_view assignment);
  /// Throws ValidationError naming the first control outside [0,1].
  void validate() const;

  static std::size_t slot(Attribute a, StyleFeature f) {
    return index_of(a) * 3 + static_cast<std::size_t>(f);
  }
  friend bool operator==(const StyleControls&, const StyleControls&) = default;
};

/// "pitch.avg" etc.
std::string control_name(Attribute a, StyleFeature f);
std::pair<Attribute, StyleFeature> parse_control_name(std::string_view name);

/// Maps each control linearly onto its training range, then through the
/// training discretizer. Rejects values outside [0,1].
RseVector control_to_rse(const StyleControls& controls, const DiscretizerSet& discretizers);

/// Min-max normalized features of a melody (inverse of the control mapping).
StyleControls normalized_controls(const StyleFeatures& features, const DiscretizerSet& discretizers);

}  // namespace songsmith
