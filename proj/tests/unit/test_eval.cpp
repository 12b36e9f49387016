#include <doctest.h>

#include "oracles.hpp"
#include "songsmith/eval/bleu.hpp"
#include "songsmith/eval/metrics.hpp"
#include "songsmith/eval/report.hpp"
#include "songsmith/eval/sweep.hpp"

using namespace songsmith;

namespace {

MelodySequence random_melody(Rng& rng, int T) {
  MelodySequence m;
  static constexpr double kDur[] = {0.5, 1.0, 2.0};
  static constexpr double kRest[] = {0.0, 0.0, 0.5, 1.0};
  for (int i = 0; i < T; ++i) m.notes.push_back({58 + int(rng.below(6)), kDur[rng.below(3)], kRest[rng.below(4)]});
  return m;
}

}  // namespace

TEST_CASE("melody metrics match the brute-force oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<MelodySequence> corpus;
    for (int i = 0; i < 6; ++i) corpus.push_back(random_melody(rng, 5 + int(rng.below(20))));
    auto got = compute_metrics(corpus);
    auto want = oracle::metrics(corpus);
    CHECK(got.midi_span == doctest::Approx(want.span).epsilon(1e-12));
    CHECK(got.two_midi_reps == doctest::Approx(want.rep2).epsilon(1e-12));
    CHECK(got.three_midi_reps == doctest::Approx(want.rep3).epsilon(1e-12));
    CHECK(got.unique_midi == doctest::Approx(want.unique).epsilon(1e-12));
    CHECK(got.restless_notes == doctest::Approx(want.restless).epsilon(1e-12));
    CHECK(got.avg_rest == doctest::Approx(want.avg_rest).epsilon(1e-12));
    CHECK(got.song_length == doctest::Approx(want.length).epsilon(1e-12));
  }
}

TEST_CASE("metric examples") {
  MelodySequence flat;
  for (int i = 0; i < 20; ++i) flat.notes.push_back({60, 1.0, 0.0});
  auto m = sequence_metrics(flat);
  CHECK(m.midi_span == 0);
  CHECK(m.unique_midi == 1);
  CHECK(m.restless_notes == 20);
  CHECK(m.avg_rest == 0);
  CHECK(m.song_length == 20);
  std::vector<int> p = {60, 62, 60, 62, 60, 62};
  CHECK(count_repetitions(p, 2, RepetitionStrategy::kEarlierOccurrence) == 3);
  CHECK(count_repetitions(p, 2, RepetitionStrategy::kDistinctRepeated) == 2);
  CHECK(count_repetitions(p, 3, RepetitionStrategy::kDistinctRepeated) == 2);
  CHECK_THROWS_AS(compute_metrics(std::vector<MelodySequence>{}), Error);
  CHECK(std::string(MelodyMetrics::kColumns[0]) == "MIDI Span");
  CHECK(std::string(MelodyMetrics::kColumns[6]) == "Song Length");
}

TEST_CASE("style MSE") {
  Rng rng(5);
  std::vector<MelodySequence> a = {random_melody(rng, 10), random_melody(rng, 10)};
  for (double v : style_mse(a, a)) CHECK(v == 0.0);
  // shift every pitch of one sequence by 2: only the pitch average moves
  std::vector<MelodySequence> ref = {a[0]}, gen = {a[0]};
  for (auto& n : gen[0].notes) n.pitch += 2;
  auto mse = style_mse(gen, ref);
  CHECK(mse[1] == doctest::Approx(4.0).epsilon(1e-12));
  for (int i : {0, 2, 3, 4, 5, 6, 7, 8}) CHECK(mse[std::size_t(i)] == doctest::Approx(0.0).epsilon(1e-12));
  auto labels = style_axis_labels();
  CHECK(labels == std::array<std::string, 9>{"PR", "PA", "PV", "DR", "DA", "DV", "RR", "RA", "RV"});
}

TEST_CASE("sentence BLEU equals the exhaustive oracle on hand-built corpora") {
  std::vector<std::vector<TokenSeq>> corpora = {
      {{1, 2, 3, 4, 5}, {1, 2, 3, 5, 4}, {2, 3, 4, 5, 1}},
      {{1, 1, 1, 2}, {1, 1, 2, 2}, {2, 2, 2, 1}},
      {{7, 8, 9}, {7, 8}, {1, 2, 3, 4}},
      {{3, 3, 3, 3, 3}, {3, 3}, {3, 4, 3, 4, 3}},
  };
  for (const auto& c : corpora) {
    for (int n = 1; n <= 4; ++n) {
      CHECK(self_bleu(c, n) == oracle::self_bleu(c, n));
      for (std::size_t i = 0; i < c.size(); ++i) {
        std::vector<TokenSeq> refs;
        for (std::size_t j = 0; j < c.size(); ++j) {
          if (j != i) refs.push_back(c[j]);
        }
        CHECK(sentence_bleu(c[i], refs, n) == oracle::bleu(c[i], refs, n));
      }
    }
  }
  // hand value: hyp (1,2,3,4,5) vs refs (1,2,3,5,4),(2,3,4,5,1), BLEU-2
  // unigrams 5/5, bigrams {12,23,34,45}: 12,23 in ref1; 23,34,45 in ref2 -> 4/4
  std::vector<TokenSeq> refs = {{1, 2, 3, 5, 4}, {2, 3, 4, 5, 1}};
  CHECK(sentence_bleu({1, 2, 3, 4, 5}, refs, 2) == doctest::Approx(1.0).epsilon(1e-15));
  // BLEU-3: trigrams 123 (ref1), 234 (ref2), 345 (ref2) -> 3/3
  CHECK(sentence_bleu({1, 2, 3, 4, 5}, refs, 3) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("self-BLEU degenerate corpora") {
  std::vector<TokenSeq> same(3, TokenSeq{4, 5, 6, 7, 8});
  for (double v : self_bleu_orders(same)) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  std::vector<TokenSeq> disjoint = {{1, 2, 3}, {4, 5, 6}, {7, 8, 9}};
  for (double v : self_bleu_orders(disjoint)) CHECK(v == 0.0);
  Rng rng(9);
  std::vector<TokenSeq> c;
  for (int i = 0; i < 5; ++i) {
    TokenSeq s;
    for (int t = 0; t < 8; ++t) s.push_back(std::int64_t(rng.below(4)));
    c.push_back(s);
  }
  auto base = self_bleu_orders(c);
  std::swap(c[0], c[3]);
  std::swap(c[1], c[4]);
  auto perm = self_bleu_orders(c);
  for (std::size_t n = 0; n < base.size(); ++n) CHECK(perm[n] == doctest::Approx(base[n]).epsilon(1e-14));
  std::vector<TokenSeq> one = {{1, 2}};
  CHECK_THROWS(self_bleu(one, 2));
}

TEST_CASE("token streams") {
  std::vector<MelodySequence> ms = {MelodySequence{{{60, 1.0, 0.0}, {61, 0.5, 1.0}}}};
  VocabSet v = build_vocab(ms);
  auto p = attribute_tokens(ms, v, Attribute::kPitch);
  CHECK(p[0] == TokenSeq{1, 2});
  auto trip = triplet_tokens(ms, v);
  // Kd = 2, Kr = 2: ((p * 3) + d) * 3 + r
  CHECK(trip[0] == TokenSeq{((1 * 3) + 2) * 3 + 1, ((2 * 3) + 1) * 3 + 2});
}

TEST_CASE("spearman") {
  std::vector<double> x = {1, 2, 3, 4}, y = {10, 20, 30, 40}, r = {4, 3, 2, 1};
  CHECK(*spearman(x, y) == doctest::Approx(1.0));
  CHECK(*spearman(x, r) == doctest::Approx(-1.0));
  std::vector<double> tied = {1, 1, 2, 3};
  // average ranks 1.5 1.5 3 4 vs 1 2 3 4
  const double rx[] = {1.5, 1.5, 3, 4}, ry[] = {1, 2, 3, 4};
  double mx = 2.5, sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 4; ++i) {
    sxy += (rx[i] - mx) * (ry[i] - mx);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - mx) * (ry[i] - mx);
  }
  CHECK(*spearman(tied, x) == doctest::Approx(sxy / std::sqrt(sxx * syy)));
  std::vector<double> one = {1};
  CHECK_FALSE(spearman(one, one).has_value());
  std::vector<double> flat = {2, 2, 2, 2};
  CHECK_FALSE(spearman(x, flat).has_value());
}

TEST_CASE("distribution summaries") {
  auto s = summarize({1, 2, 3, 4, 100});
  CHECK(s.count == 5);
  CHECK(s.median == 3);
  CHECK(s.q1 == 2);
  CHECK(s.q3 == 4);
  CHECK(s.upper_whisker == 4);  // 100 lies beyond q3 + 1.5 IQR
  CHECK(s.lower_whisker == 1);
  CHECK(s.mean == doctest::Approx(22.0));
  auto q = summarize({1, 2, 3, 4});
  CHECK(q.q1 == doctest::Approx(1.75));
  CHECK(q.median == doctest::Approx(2.5));
}

TEST_CASE("sweeps and reports") {
  ToyCorpusConfig tc;
  tc.count = 30;
  tc.length = 8;
  auto all = make_toy_corpus(tc);
  auto model = oracle::tiny_bundle(all, all);
  std::vector<LyricsSequence> lyrics;
  for (int i = 0; i < 5; ++i) lyrics.push_back(all[std::size_t(i)].lyrics);

  SweepConfig one;
  one.candidates = {0.5};
  auto degenerate = controllability_sweep(model, lyrics, one);
  CHECK_FALSE(degenerate.spearman.has_value());
  CHECK(degenerate.values.size() == 1);
  CHECK(degenerate.values[0].size() == 5 * 8);  // note values for an average sweep

  SweepConfig four;
  four.seed = 3;
  auto a = controllability_sweep(model, lyrics, four), b = controllability_sweep(model, lyrics, four);
  CHECK(a.feature == "pitch.avg");
  CHECK(a.summaries.size() == 4);
  CHECK(render_report(a, ReportFormat::kRecords) == render_report(b, ReportFormat::kRecords));
  CHECK(render_report(a, ReportFormat::kPlotData) == render_report(b, ReportFormat::kPlotData));

  SweepConfig range = four;
  range.feature = StyleFeature::kRange;
  CHECK(controllability_sweep(model, lyrics, range).values[0].size() == 5);

  std::vector<MelodySequence> ms;
  for (const auto& s : all) ms.push_back(s.melody);
  EvalReport r;
  r.corpus_id = "toy";
  r.sequences = ms.size();
  r.metrics = compute_metrics(ms);
  r.style_mse = style_mse(ms, ms);
  r.self_bleu["triplet"] = self_bleu_orders(triplet_tokens(ms, model.vocab));
  const std::string rec = render_report(r, ReportFormat::kRecords);
  CHECK(rec == render_report(r, ReportFormat::kRecords));
  int metric_records = 0;
  std::istringstream lines(rec);
  for (std::string line; std::getline(lines, line);) {
    auto j = nlohmann::json::parse(line);
    if (j["record"] == "metric") {
      CHECK(j["column"] == MelodyMetrics::kColumns[std::size_t(metric_records)]);
      ++metric_records;
    }
  }
  CHECK(metric_records == 7);
  auto plot = nlohmann::json::parse(render_report(r, ReportFormat::kPlotData));
  CHECK(plot["radar"]["axes"][0] == "PR");
  CHECK(plot["radar"]["axes"][8] == "RV");
  CHECK(parse_report_format("plot") == ReportFormat::kPlotData);
  CHECK_THROWS_AS(parse_report_format("xml"), ValidationError);
}
