#include "songsmith/core/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "songsmith/core/random.hpp"

namespace songsmith {
namespace {

using nlohmann::json;

constexpr const char* kCorpusFormat = "songsmith.corpus";

NoteEvent parse_note(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error("note must be a [pitch, duration, rest] triple");
  const double pitch = j[0].get<double>();
  NoteEvent n{static_cast<int>(std::lround(pitch)), j[1].get<double>(), j[2].get<double>()};
  if (std::abs(pitch - n.pitch) > 1e-9 || n.pitch < 0 || n.pitch > 127) {
    throw Error("pitch " + j[0].dump() + " is not a MIDI note number");
  }
  if (!std::isfinite(n.duration) || n.duration <= 0) throw Error("duration must be positive");
  if (!std::isfinite(n.rest) || n.rest < 0) throw Error("rest must be non-negative");
  return n;
}

MelodySequence parse_notes(const json& j) {
  MelodySequence m;
  for (const auto& n : j) m.notes.push_back(parse_note(n));
  return m;
}

PairedSample parse_record(const json& j, std::size_t record) {
  LyricsSequence lyrics;
  for (const auto& word : j.at("lyrics")) {
    const std::size_t first = lyrics.syllables.size();
    for (const auto& s : word) lyrics.syllables.push_back(s.get<std::string>());
    lyrics.word_spans.emplace_back(first, lyrics.syllables.size());
  }
  std::string id = j.contains("id") ? j["id"].get<std::string>() : "r" + std::to_string(record);
  return make_sample(std::move(id), std::move(lyrics), parse_notes(j.at("notes")));
}

// Groups syllables into words by spelling: syllables are appended until
// their concatenation spells the current word (case and punctuation ignored).
LyricsSequence group_syllables(const std::vector<std::string>& syllables,
                               const std::vector<std::string>& words) {
  auto norm = [](const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
      if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
  };
  LyricsSequence lyrics;
  lyrics.syllables = syllables;
  // One word entry per syllable: consecutive syllables that spell the entry.
  if (words.size() == syllables.size()) {
    std::size_t i = 0;
    while (i < syllables.size()) {
      const std::string target = norm(words[i]);
      std::string acc;
      std::size_t j = i;
      while (j < syllables.size() && acc.size() < target.size()) acc += norm(syllables[j++]);
      if (acc != target || j == i) j = i + 1;
      lyrics.word_spans.emplace_back(i, j);
      i = j;
    }
    return lyrics;
  }
  std::size_t i = 0;
  for (const auto& w : words) {
    const std::string target = norm(w);
    std::string acc;
    const std::size_t first = i;
    while (i < syllables.size() && acc.size() < target.size()) acc += norm(syllables[i++]);
    if (acc != target || i == first) throw Error("syllables do not spell word '" + w + "'");
    lyrics.word_spans.emplace_back(first, i);
  }
  if (i != syllables.size()) throw Error("alignment mismatch: syllables left after last word");
  return lyrics;
}

PairedSample parse_paired(const json& j, std::size_t record) {
  const json* notes = &j;
  const json* syllables = nullptr;
  const json* words = nullptr;
  if (j.is_array()) {
    if (j.size() != 3) throw Error("paired record must be [notes, syllables, words]");
    notes = &j[0];
    syllables = &j[1];
    words = &j[2];
  } else {
    notes = &j.at("notes");
    syllables = &j.at("syllables");
    words = &j.at("words");
  }
  auto lyrics = group_syllables(syllables->get<std::vector<std::string>>(),
                                words->get<std::vector<std::string>>());
  return make_sample("p" + std::to_string(record), std::move(lyrics), parse_notes(*notes));
}

}  // namespace

PairedSample make_sample(std::string id, LyricsSequence lyrics, MelodySequence melody) {
  lyrics.validate();
  if (lyrics.size() != melody.size()) {
    throw Error("alignment mismatch: " + std::to_string(lyrics.size()) + " syllables vs " +
                std::to_string(melody.size()) + " notes");
  }
  PairedSample s{std::move(id), std::move(lyrics), std::move(melody), {}};
  s.style = extract_style_features(s.melody);
  return s;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "records" || name == "jsonl") return CorpusFormat::kRecords;
  if (name == "paired") return CorpusFormat::kPaired;
  throw Error("unknown corpus format '" + std::string(name) + "'");
}

IngestResult ingest_corpus(const std::filesystem::path& path, CorpusFormat format,
                           const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("corpus not found or unreadable: " + path.string());

  // (record json, line number) pairs; a file starting with '[' is one JSON array.
  std::vector<std::pair<json, std::size_t>> records;
  IngestResult result;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[' && format == CorpusFormat::kPaired) {
    json all;
    try {
      all = json::parse(text);
    } catch (const json::exception& e) {
      throw Error("malformed corpus array in " + path.string() + ": " + e.what());
    }
    for (auto& r : all) records.emplace_back(std::move(r), 0);
  } else {
    std::istringstream lines(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        json j = json::parse(line);
        if (j.is_object() && j.contains("format") && !j.contains("notes")) {
          if (j["format"] != kCorpusFormat) throw Error("unknown corpus header format");
          continue;
        }
        records.emplace_back(std::move(j), lineno);
      } catch (const json::exception& e) {
        if (options.strict) {
          throw Error("malformed record at line " + std::to_string(lineno) + ": " + e.what());
        }
        result.skipped.push_back({records.size() + result.skipped.size(), lineno,
                                  std::string("malformed record: ") + e.what()});
      }
    }
  }

  result.records_seen = records.size() + result.skipped.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& [j, lineno] = records[i];
    const std::size_t record = i;
    try {
      PairedSample s = format == CorpusFormat::kRecords ? parse_record(j, record)
                                                        : parse_paired(j, record);
      if (options.vocab && !options.vocab->representable(s.melody)) {
        throw Error("vocabulary overflow: value not representable");
      }
      result.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      const std::string where =
          lineno ? "line " + std::to_string(lineno) : "record " + std::to_string(record);
      if (options.strict) throw Error(where + ": " + e.what());
      result.skipped.push_back({record, lineno, e.what()});
    }
  }
  return result;
}

void write_corpus(std::span<const PairedSample> samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << json{{"format", kCorpusFormat}, {"version", 1}}.dump() << '\n';
  for (const auto& s : samples) {
    json words = json::array();
    for (const auto& [a, b] : s.lyrics.word_spans) {
      words.push_back(std::vector<std::string>(s.lyrics.syllables.begin() + a,
                                               s.lyrics.syllables.begin() + b));
    }
    json notes = json::array();
    for (const auto& n : s.melody.notes) notes.push_back({n.pitch, n.duration, n.rest});
    out << json{{"id", s.id}, {"lyrics", words}, {"notes", notes}}.dump() << '\n';
  }
}

bool passes_filter(const StyleFeatures& style, const FilterBounds& b) {
  auto within = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  const auto& p = style[Attribute::kPitch];
  const auto& d = style[Attribute::kDuration];
  const auto& r = style[Attribute::kRest];
  return within(p.range, b.pitch_range_min, b.pitch_range_max) &&
         within(p.average, b.pitch_avg_min, b.pitch_avg_max) &&
         within(d.range, b.duration_range_min, b.duration_range_max) &&
         within(d.average, b.duration_avg_min, b.duration_avg_max) &&
         within(r.range, b.rest_range_min, b.rest_range_max);
}

std::vector<PairedSample> filter_dataset(std::span<const PairedSample> samples,
                                         const FilterBounds& bounds) {
  std::vector<PairedSample> out;
  std::copy_if(samples.begin(), samples.end(), std::back_inserter(out),
               [&](const PairedSample& s) { return passes_filter(s.style, bounds); });
  return out;
}

DatasetSplit split_dataset(std::span<const PairedSample> samples, std::uint64_t seed,
                           std::array<int, 3> ratios) {
  const std::size_t n = samples.size();
  if (n < 10) throw Error("too few samples to split: " + std::to_string(n) + " < 10");
  const int total = ratios[0] + ratios[1] + ratios[2];
  if (ratios[0] <= 0 || ratios[1] < 0 || ratios[2] < 0 || total <= 0) {
    throw Error("split ratios must be positive");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::stream(seed, "split");
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);

  const auto n_train = static_cast<std::size_t>(std::llround(double(n) * ratios[0] / total));
  const auto n_valid = static_cast<std::size_t>(std::llround(double(n) * ratios[1] / total));
  DatasetSplit split;
  split.seed = seed;
  for (std::size_t i = 0; i < n; ++i) {
    auto& dst = i < n_train ? split.train : i < n_train + n_valid ? split.valid : split.test;
    dst.push_back(samples[order[i]]);
  }
  return split;
}

std::vector<PairedSample> make_toy_corpus(const ToyCorpusConfig& config) {
  if (config.length < 2) throw Error("toy melodies need at least 2 notes");
  static constexpr const char* kOnsets[] = {"b", "d", "k", "l", "m", "n", "p", "r", "s", "t"};
  static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u"};

  Rng lex_rng = Rng::stream(config.seed, "toy-lexicon");
  std::vector<std::vector<std::string>> lexicon(64);
  for (auto& word : lexicon) {
    const std::size_t syllables = 1 + lex_rng.below(3);
    for (std::size_t i = 0; i < syllables; ++i) {
      word.push_back(std::string(kOnsets[lex_rng.below(10)]) + kVowels[lex_rng.below(5)]);
    }
  }

  Rng rng = Rng::stream(config.seed, "toy-melody");
  std::vector<PairedSample> out;
  out.reserve(config.count);
  for (std::size_t s = 0; s < config.count; ++s) {
    LyricsSequence lyrics;
    while (lyrics.size() < config.length) {
      const auto& word = lexicon[rng.below(lexicon.size())];
      const std::size_t first = lyrics.size();
      for (const auto& syl : word) {
        if (lyrics.size() == config.length) break;
        lyrics.syllables.push_back(syl);
      }
      lyrics.word_spans.emplace_back(first, lyrics.size());
    }
    std::vector<bool> word_end(config.length, false);
    for (const auto& [a, b] : lyrics.word_spans) word_end[b - 1] = true;

    const bool complex = rng.uniform() < config.complex_rhythm_share;
    const int center = config.pitch_center_min +
                       static_cast<int>(rng.below(static_cast<std::uint64_t>(
                           config.pitch_center_max - config.pitch_center_min + 1)));
    const int spread = complex ? 5 : 3;

    MelodySequence melody;
    int pitch = center;
    int direction = rng.below(2) ? 1 : -1;
    for (std::size_t t = 0; t < config.length; ++t) {
      NoteEvent n;
      if (t > 0) {
        // Stepwise contour that turns around at the edges of the band.
        if (pitch + direction > center + spread || pitch + direction < center - spread ||
            rng.uniform() < 0.2) {
          direction = -direction;
        }
        pitch += direction * (complex && rng.uniform() < 0.3 ? 2 : 1);
        pitch = std::clamp(pitch, center - spread, center + spread);
      }
      n.pitch = pitch;
      if (complex) {
        static constexpr double kShort[] = {0.25, 0.5, 0.75};
        n.duration = word_end[t] ? (rng.uniform() < 0.5 ? 1.5 : 2.0) : kShort[rng.below(3)];
        n.rest = word_end[t] && rng.uniform() < 0.4 ? 0.5 : 0.0;
      } else {
        n.duration = word_end[t] ? 2.0 : 1.0;
        n.rest = (t + 1) % 5 == 0 ? 1.0 : 0.0;
      }
      melody.notes.push_back(n);
    }
    out.push_back(make_sample("toy" + std::to_string(s), std::move(lyrics), std::move(melody)));
  }
  return out;
}

}  // namespace songsmith
