#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "songsmith/core/types.hpp"

namespace songsmith {

struct TokenizerOptions {
  bool lowercase = true;
  bool strip_punctuation = true;
};

/// Whitespace separates words; '-' separates syllables inside a word
/// ("yes-ter-day all my trou-bles").
LyricsSequence tokenize_lyrics(std::string_view text, const TokenizerOptions& options = {});

/// Token -> dense vector lookup, immutable once built.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::vector<std::string> tokens, Eigen::MatrixXd vectors);

  std::size_t size() const { return tokens_.size(); }
  int dim() const { return static_cast<int>(vectors_.cols()); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  /// One row per token.
  const Eigen::MatrixXd& vectors() const { return vectors_; }
  std::optional<std::size_t> find(const std::string& token) const;
  /// Out-of-vocabulary vector: the arithmetic mean of all rows.
  const Eigen::VectorXd& oov_vector() const { return oov_; }

  /// Text format: "count dim" header, then "token v1 ... vdim" per line.
  void save(const std::filesystem::path& path) const;
  static EmbeddingTable load(const std::filesystem::path& path,
                             std::optional<int> expected_dim = std::nullopt);

 private:
  std::vector<std::string> tokens_;
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd oov_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct SkipGramConfig {
  int dim = 50;
  int window = 3;
  int negatives = 5;
  int epochs = 5;
  double learning_rate = 0.025;
  std::uint64_t seed = 1;
};

/// Skip-gram with negative sampling over token sequences (one corpus per
/// level: word streams or syllable streams). Deterministic given the seed.
EmbeddingTable train_skipgram(const std::vector<std::vector<std::string>>& corpus,
                              const SkipGramConfig& config = {});

/// Word and syllable streams of a lyrics collection, for train_skipgram.
std::vector<std::vector<std::string>> word_streams(const std::vector<LyricsSequence>& lyrics);
std::vector<std::vector<std::string>> syllable_streams(const std::vector<LyricsSequence>& lyrics);

struct LyricEmbedding {
  /// T rows; row t = [word vector of syllable t's word, syllable vector].
  Eigen::MatrixXd vectors;
  std::vector<bool> word_oov, syllable_oov;
  int oov_count = 0;  // positions where either lookup fell back to the mean

  int length() const { return static_cast<int>(vectors.rows()); }
};

LyricEmbedding embed_lyrics(const LyricsSequence& lyrics, const EmbeddingTable& words,
                            const EmbeddingTable& syllables);

}  // namespace songsmith
