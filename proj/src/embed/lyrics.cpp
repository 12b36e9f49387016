#include "songsmith/embed/lyrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "songsmith/core/random.hpp"

namespace songsmith {

LyricsSequence tokenize_lyrics(std::string_view text, const TokenizerOptions& options) {
  LyricsSequence out;
  std::istringstream words{std::string(text)};
  std::string word;
  while (words >> word) {
    const std::size_t first = out.syllables.size();
    std::string syl;
    auto flush = [&] {
      if (!syl.empty()) out.syllables.push_back(std::move(syl));
      syl.clear();
    };
    for (unsigned char c : word) {
      if (c == '-') {
        flush();
        continue;
      }
      if (options.strip_punctuation && std::ispunct(c) && c != '\'') continue;
      syl.push_back(options.lowercase ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    }
    flush();
    if (out.syllables.size() > first) out.word_spans.emplace_back(first, out.syllables.size());
  }
  return out;
}

EmbeddingTable::EmbeddingTable(std::vector<std::string> tokens, Eigen::MatrixXd vectors)
    : tokens_(std::move(tokens)), vectors_(std::move(vectors)) {
  if (tokens_.empty()) throw Error("empty table");
  if (static_cast<Eigen::Index>(tokens_.size()) != vectors_.rows()) {
    throw Error("token count does not match vector rows");
  }
  if (!vectors_.allFinite()) throw Error("embedding table has non-finite values");
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) throw Error("duplicate token '" + tokens_[i] + "'");
  }
  oov_ = vectors_.colwise().mean().transpose();
}

std::optional<std::size_t> EmbeddingTable::find(const std::string& token) const {
  if (auto it = index_.find(token); it != index_.end()) return it->second;
  return std::nullopt;
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << tokens_.size() << ' ' << dim() << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out << tokens_[i];
    for (int d = 0; d < dim(); ++d) out << ' ' << vectors_(static_cast<Eigen::Index>(i), d);
    out << '\n';
  }
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path, std::optional<int> expected_dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read embedding table " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.find_first_not_of(" \t\r") == std::string::npos) {
    throw Error("empty table");
  }
  std::istringstream header(line);
  long count = 0;
  int dim = 0;
  if (!(header >> count >> dim) || count <= 0 || dim <= 0) {
    throw Error("parse failure: bad header '" + line + "', expected 'count dim'");
  }
  if (expected_dim && dim != *expected_dim) {
    throw Error("dimension mismatch: table has dim " + std::to_string(dim) + ", config expects " +
                std::to_string(*expected_dim));
  }
  std::vector<std::string> tokens;
  Eigen::MatrixXd vectors(count, dim);
  long row = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (row >= count) throw Error("parse failure: more rows than the header count " + std::to_string(count));
    std::istringstream ls(line);
    std::string token;
    ls >> token;
    std::vector<double> values;
    std::string field;
    while (ls >> field) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw Error("parse failure: row " + std::to_string(row + 1) + " (" + token +
                    ") has a non-numeric value '" + field + "'");
      }
    }
    if (static_cast<int>(values.size()) != dim) {
      throw Error("parse failure: row " + std::to_string(row + 1) + " (" + token + ") has " +
                  std::to_string(values.size()) + " values, expected " + std::to_string(dim));
    }
    for (int d = 0; d < dim; ++d) vectors(row, d) = values[static_cast<std::size_t>(d)];
    tokens.push_back(token);
    ++row;
  }
  if (row != count) {
    throw Error("parse failure: header promises " + std::to_string(count) + " rows, found " +
                std::to_string(row));
  }
  return {std::move(tokens), std::move(vectors)};
}

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

EmbeddingTable train_skipgram(const std::vector<std::vector<std::string>>& corpus,
                              const SkipGramConfig& config) {
  if (config.dim < 2) throw Error("embedding dim must be at least 2");
  std::map<std::string, long> counts;
  long total = 0;
  for (const auto& seq : corpus) {
    for (const auto& tok : seq) {
      ++counts[tok];
      ++total;
    }
  }
  if (total == 0) throw Error("empty corpus");

  // Frequency-descending vocabulary, ties broken by token text.
  std::vector<std::pair<std::string, long>> vocab(counts.begin(), counts.end());
  std::stable_sort(vocab.begin(), vocab.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::map<std::string, int> id;
  std::vector<std::string> tokens;
  for (const auto& [tok, c] : vocab) {
    id[tok] = static_cast<int>(tokens.size());
    tokens.push_back(tok);
  }
  const auto n = static_cast<Eigen::Index>(tokens.size());

  Rng rng = Rng::stream(config.seed, "skipgram");
  Eigen::MatrixXd in(n, config.dim), out = Eigen::MatrixXd::Zero(n, config.dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < config.dim; ++d) in(i, d) = (rng.uniform() - 0.5) / config.dim;
  }

  // Negative-sampling distribution: unigram counts raised to 3/4.
  std::vector<double> cdf(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    acc += std::pow(static_cast<double>(vocab[i].second), 0.75);
    cdf[i] = acc;
  }
  auto draw_negative = [&] {
    const double u = rng.uniform() * acc;
    return static_cast<Eigen::Index>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  };

  std::vector<std::vector<int>> ids;
  for (const auto& seq : corpus) {
    std::vector<int> s;
    for (const auto& tok : seq) s.push_back(id[tok]);
    ids.push_back(std::move(s));
  }

  const double total_steps = static_cast<double>(config.epochs) * static_cast<double>(total);
  double step = 0;
  Eigen::VectorXd grad_in(config.dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& seq : ids) {
      for (std::size_t c = 0; c < seq.size(); ++c, ++step) {
        const double lr = config.learning_rate * std::max(1e-4, 1.0 - step / total_steps);
        // word2vec-style shrunken window
        const int reach = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(config.window)));
        const auto lo = static_cast<std::size_t>(std::max<long>(0, static_cast<long>(c) - reach));
        const std::size_t hi = std::min(seq.size() - 1, c + static_cast<std::size_t>(reach));
        for (std::size_t o = lo; o <= hi; ++o) {
          if (o == c) continue;
          const Eigen::Index center = seq[c];
          grad_in.setZero();
          for (int k = 0; k <= config.negatives; ++k) {
            const Eigen::Index target = k == 0 ? seq[o] : draw_negative();
            if (k > 0 && target == seq[o]) continue;
            const double label = k == 0 ? 1.0 : 0.0;
            const double g = lr * (label - sigmoid(in.row(center).dot(out.row(target))));
            grad_in += g * out.row(target).transpose();
            out.row(target) += g * in.row(center);
          }
          in.row(center) += grad_in.transpose();
        }
      }
    }
  }
  return {std::move(tokens), std::move(in)};
}

std::vector<std::vector<std::string>> word_streams(const std::vector<LyricsSequence>& lyrics) {
  std::vector<std::vector<std::string>> out;
  for (const auto& l : lyrics) {
    std::vector<std::string> words;
    for (const auto& [a, b] : l.word_spans) {
      std::string w;
      for (std::size_t i = a; i < b; ++i) w += l.syllables[i];
      words.push_back(std::move(w));
    }
    out.push_back(std::move(words));
  }
  return out;
}

std::vector<std::vector<std::string>> syllable_streams(const std::vector<LyricsSequence>& lyrics) {
  std::vector<std::vector<std::string>> out;
  for (const auto& l : lyrics) out.push_back(l.syllables);
  return out;
}

LyricEmbedding embed_lyrics(const LyricsSequence& lyrics, const EmbeddingTable& words,
                            const EmbeddingTable& syllables) {
  const auto word_text = lyrics.word_of_each_syllable();
  const auto t_len = static_cast<Eigen::Index>(lyrics.size());
  LyricEmbedding e;
  e.vectors.resize(t_len, words.dim() + syllables.dim());
  e.word_oov.resize(lyrics.size());
  e.syllable_oov.resize(lyrics.size());
  for (Eigen::Index t = 0; t < t_len; ++t) {
    const auto ut = static_cast<std::size_t>(t);
    const auto w = words.find(word_text[ut]);
    const auto s = syllables.find(lyrics.syllables[ut]);
    e.word_oov[ut] = !w;
    e.syllable_oov[ut] = !s;
    if (!w || !s) ++e.oov_count;
    e.vectors.row(t).head(words.dim()) =
        w ? Eigen::VectorXd(words.vectors().row(static_cast<Eigen::Index>(*w))) : words.oov_vector();
    e.vectors.row(t).tail(syllables.dim()) =
        s ? Eigen::VectorXd(syllables.vectors().row(static_cast<Eigen::Index>(*s)))
          : syllables.oov_vector();
  }
  return e;
}

}  // namespace songsmith
