#include "songsmith/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

namespace songsmith {

int count_repetitions(std::span<const int> pitches, int n, RepetitionStrategy strategy) {
  if (n < 1 || static_cast<int>(pitches.size()) < n) return 0;
  std::map<std::vector<int>, int> seen;
  int repeated_positions = 0;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= pitches.size(); ++i) {
    std::vector<int> gram(pitches.begin() + static_cast<std::ptrdiff_t>(i),
                          pitches.begin() + static_cast<std::ptrdiff_t>(i) + n);
    if (seen[gram]++ > 0) ++repeated_positions;
  }
  if (strategy == RepetitionStrategy::kEarlierOccurrence) return repeated_positions;
  int distinct = 0;
  for (const auto& kv : seen) distinct += kv.second > 1;
  return distinct;
}

MelodyMetrics sequence_metrics(const MelodySequence& m, RepetitionStrategy strategy) {
  if (m.empty()) throw Error("metrics: empty sequence");
  std::vector<int> p;
  for (const auto& n : m.notes) p.push_back(n.pitch);
  MelodyMetrics r;
  const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
  r.midi_span = *hi - *lo;
  r.two_midi_reps = count_repetitions(p, 2, strategy);
  r.three_midi_reps = count_repetitions(p, 3, strategy);
  r.unique_midi = static_cast<double>(std::set<int>(p.begin(), p.end()).size());
  double rest_sum = 0.0;
  for (const auto& n : m.notes) {
    r.restless_notes += n.rest == 0.0;
    rest_sum += n.rest;
  }
  r.avg_rest = rest_sum / static_cast<double>(m.size());
  r.song_length = m.total_length();
  return r;
}

MelodyMetrics compute_metrics(std::span<const MelodySequence> corpus, RepetitionStrategy strategy) {
  if (corpus.empty()) throw Error("metrics: empty corpus");
  std::array<double, 7> sum{};
  for (const auto& m : corpus) {
    const auto v = sequence_metrics(m, strategy).values();
    for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
  }
  const double n = static_cast<double>(corpus.size());
  return {sum[0] / n, sum[1] / n, sum[2] / n, sum[3] / n, sum[4] / n, sum[5] / n, sum[6] / n};
}

std::array<double, 9> style_mse(std::span<const MelodySequence> generated,
                                std::span<const MelodySequence> reference) {
  if (generated.size() != reference.size()) throw Error("style_mse: corpus length mismatch");
  if (generated.empty()) throw Error("style_mse: empty corpus");
  std::array<double, 9> mse{};
  for (std::size_t i = 0; i < generated.size(); ++i) {
    const auto g = extract_style_features(generated[i]).flat();
    const auto r = extract_style_features(reference[i]).flat();
    for (std::size_t k = 0; k < 9; ++k) mse[k] += (g[k] - r[k]) * (g[k] - r[k]);
  }
  for (double& v : mse) v /= static_cast<double>(generated.size());
  return mse;
}

std::array<std::string, 9> style_axis_labels() {
  std::array<std::string, 9> out;
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : {StyleFeature::kRange, StyleFeature::kAverage, StyleFeature::kVariance}) {
      out[index_of(a) * 3 + static_cast<std::size_t>(f)] = feature_code(a, f);
    }
  }
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i + j) / 2.0) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace songsmith
