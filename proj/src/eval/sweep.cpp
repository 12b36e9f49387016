#include "songsmith/eval/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "songsmith/eval/metrics.hpp"

namespace songsmith {

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

DistributionSummary summarize(std::vector<double> values) {
  if (values.empty()) throw Error("summarize: empty distribution");
  std::sort(values.begin(), values.end());
  DistributionSummary s;
  s.count = values.size();
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.min = values.front();
  s.max = values.back();
  s.q1 = quantile(values, 0.25);
  s.median = quantile(values, 0.5);
  s.q3 = quantile(values, 0.75);
  const double iqr = s.q3 - s.q1;
  s.lower_whisker = *std::lower_bound(values.begin(), values.end(), s.q1 - 1.5 * iqr);
  s.upper_whisker = *(std::upper_bound(values.begin(), values.end(), s.q3 + 1.5 * iqr) - 1);
  return s;
}

SweepResult controllability_sweep(const ModelBundle& model, const std::vector<LyricsSequence>& lyrics,
                                  const SweepConfig& config) {
  if (lyrics.empty()) throw Error("sweep: no lyrics");
  if (config.candidates.empty()) throw Error("sweep: no candidates");
  SweepResult result;
  result.feature = control_name(config.attribute, config.feature);
  result.candidates = config.candidates;
  std::vector<double> means;
  for (double candidate : config.candidates) {
    StyleControls controls;
    controls.values.fill(config.fixed_value);
    controls.set(config.attribute, config.feature, candidate);
    const RseVector rse = control_to_rse(controls, model.discretizers);
    std::vector<GenerationItem> items;
    items.reserve(lyrics.size());
    for (std::size_t i = 0; i < lyrics.size(); ++i) {
      items.push_back({lyrics[i], rse, config.seed + 1000003ULL * i});
    }
    const auto outputs = generate(model, items);
    std::vector<double> values;
    for (const auto& out : outputs) {
      if (config.feature == StyleFeature::kAverage) {
        for (const auto& n : out.melody.notes) values.push_back(n.value(config.attribute));
      } else if (out.melody.size() >= 2) {
        values.push_back(extract_style_features(out.melody).get(config.attribute, config.feature));
      }
    }
    result.summaries.push_back(summarize(values));
    means.push_back(result.summaries.back().mean);
    result.values.push_back(std::move(values));
  }
  result.spearman = spearman(config.candidates, means);
  return result;
}

}  // namespace songsmith
