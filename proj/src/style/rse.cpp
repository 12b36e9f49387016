#include "songsmith/style/rse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace songsmith {
namespace {

// Tolerance that keeps values sitting on a left bin edge inside that bin.
constexpr double kEdgeTolerance = 1e-9;

int at_least_one(double v) { return std::max(1, static_cast<int>(std::lround(v))); }

}  // namespace

FeatureDiscretizer::FeatureDiscretizer(Attribute attribute, StyleFeature feature, int bins,
                                       double min, double max)
    : attribute_(attribute), feature_(feature), bins_(bins), min_(min), max_(max) {
  if (bins_ < 1) throw Error("discretizer needs at least one bin");
  if (!(max_ >= min_)) throw Error("discretizer max below min");
}

std::vector<double> FeatureDiscretizer::edges() const {
  std::vector<double> e(static_cast<std::size_t>(bins_) + 1);
  for (int i = 0; i <= bins_; ++i) e[static_cast<std::size_t>(i)] = min_ + (max_ - min_) * i / bins_;
  return e;
}

double FeatureDiscretizer::normalize(double value) const {
  if (max_ == min_) return 0.0;
  return (value - min_) / (max_ - min_);
}

int FeatureDiscretizer::bin_of(double value) const {
  const double pos = normalize(value) * bins_ + kEdgeTolerance;
  if (!(pos > 0)) return 0;
  return std::min(bins_ - 1, static_cast<int>(std::floor(pos)));
}

int DiscretizerSet::rse_dim(Attribute a) const {
  int d = 0;
  for (StyleFeature f : kAllFeatures) d += at(a, f).bins();
  return d;
}

std::array<int, kNumAttributes> DiscretizerSet::rse_dims() const {
  return {rse_dim(Attribute::kPitch), rse_dim(Attribute::kDuration), rse_dim(Attribute::kRest)};
}

nlohmann::json DiscretizerSet::to_json() const {
  nlohmann::json features = nlohmann::json::array();
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : kAllFeatures) {
      const auto& d = at(a, f);
      features.push_back({{"attribute", attribute_name(a)},
                          {"feature", feature_name(f)},
                          {"bins", d.bins()},
                          {"min", d.min()},
                          {"max", d.max()},
                          {"edges", d.edges()}});
    }
  }
  return {{"format", "songsmith.discretizers"}, {"version", 1}, {"features", features}};
}

DiscretizerSet DiscretizerSet::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "songsmith.discretizers" || j.value("version", 0) != 1) {
    throw Error("not a version-1 discretizer manifest");
  }
  DiscretizerSet set;
  int seen = 0;
  for (const auto& f : j.at("features")) {
    const Attribute a = parse_attribute(f.at("attribute").get<std::string>());
    const StyleFeature s = parse_feature(f.at("feature").get<std::string>());
    set.at(a, s) = FeatureDiscretizer(a, s, f.at("bins").get<int>(), f.at("min").get<double>(),
                                      f.at("max").get<double>());
    ++seen;
  }
  if (seen != 9) throw Error("discretizer manifest must list nine features");
  return set;
}

DiscretizerSet fit_discretizers(std::span<const StyleFeatures> train_features,
                                const DiscretizerRules& rules) {
  if (train_features.empty()) throw Error("cannot fit discretizers on an empty training set");
  DiscretizerSet set;
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : kAllFeatures) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (const auto& s : train_features) {
        lo = std::min(lo, s.get(a, f));
        hi = std::max(hi, s.get(a, f));
      }
      int bins = 1;
      switch (f) {
        case StyleFeature::kRange: bins = at_least_one(hi - lo); break;
        case StyleFeature::kAverage:
          bins = a == Attribute::kPitch      ? at_least_one(hi - lo)
                 : a == Attribute::kDuration ? rules.duration_avg_bins
                                             : rules.rest_avg_bins;
          break;
        case StyleFeature::kVariance: bins = rules.variance_bins[index_of(a)]; break;
      }
      if (hi == lo) {
        set.warnings().push_back("degenerate feature " + control_name(a, f) +
                                 " (all values " + std::to_string(lo) + "): single bin");
        bins = 1;
      }
      set.at(a, f) = FeatureDiscretizer(a, f, bins, lo, hi);
    }
  }
  return set;
}

namespace {

RseVector assemble(const std::array<std::array<int, 3>, kNumAttributes>& bins,
                   const DiscretizerSet& d) {
  RseVector rse;
  rse.bins = bins;
  for (Attribute a : kAllAttributes) {
    auto& v = rse.branch[index_of(a)];
    v.assign(static_cast<std::size_t>(d.rse_dim(a)), 0.0);
    std::size_t offset = 0;
    for (StyleFeature f : kAllFeatures) {
      v[offset + static_cast<std::size_t>(bins[index_of(a)][static_cast<std::size_t>(f)])] = 1.0;
      offset += static_cast<std::size_t>(d.at(a, f).bins());
    }
  }
  return rse;
}

}  // namespace

RseVector build_rse(const StyleFeatures& features, const DiscretizerSet& discretizers) {
  std::array<std::array<int, 3>, kNumAttributes> bins{};
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : kAllFeatures) {
      bins[index_of(a)][static_cast<std::size_t>(f)] = discretizers.at(a, f).bin_of(features.get(a, f));
    }
  }
  return assemble(bins, discretizers);
}

std::string control_name(Attribute a, StyleFeature f) {
  return std::string(attribute_name(a)) + "." + std::string(feature_name(f));
}

std::pair<Attribute, StyleFeature> parse_control_name(std::string_view name) {
  const auto dot = name.find('.');
  if (dot == std::string_view::npos) {
    throw ValidationError(std::string(name), "control name must look like 'pitch.avg'");
  }
  try {
    return {parse_attribute(name.substr(0, dot)), parse_feature(name.substr(dot + 1))};
  } catch (const Error& e) {
    throw ValidationError(std::string(name), e.what());
  }
}

void StyleControls::assign(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ValidationError(std::string(assignment), "control must look like 'pitch.avg=0.9'");
  }
  const auto [a, f] = parse_control_name(assignment.substr(0, eq));
  const std::string value(assignment.substr(eq + 1));
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    set(a, f, v);
  } catch (const std::exception&) {
    throw ValidationError(control_name(a, f), "control " + control_name(a, f) + " is not a number");
  }
}

void StyleControls::validate() const {
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : kAllFeatures) {
      const double v = get(a, f);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError(control_name(a, f), "control " + control_name(a, f) + " = " +
                                                      std::to_string(v) + " is outside [0,1]");
      }
    }
  }
}

RseVector control_to_rse(const StyleControls& controls, const DiscretizerSet& discretizers) {
  controls.validate();
  std::array<std::array<int, 3>, kNumAttributes> bins{};
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : kAllFeatures) {
      const auto& d = discretizers.at(a, f);
      bins[index_of(a)][static_cast<std::size_t>(f)] = d.bin_of(d.denormalize(controls.get(a, f)));
    }
  }
  return assemble(bins, discretizers);
}

StyleControls normalized_controls(const StyleFeatures& features, const DiscretizerSet& discretizers) {
  StyleControls c;
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : kAllFeatures) {
      c.set(a, f, std::clamp(discretizers.at(a, f).normalize(features.get(a, f)), 0.0, 1.0));
    }
  }
  return c;
}

}  // namespace songsmith
