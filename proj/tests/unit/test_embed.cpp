#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "songsmith/embed/lyrics.hpp"

using namespace songsmith;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  auto dir = fs::temp_directory_path() / "songsmith_embed";
  fs::create_directories(dir);
  auto p = dir / name;
  std::ofstream(p) << content;
  return p;
}

double cosine(const EmbeddingTable& t, const std::string& a, const std::string& b) {
  const Eigen::VectorXd x = t.vectors().row(Eigen::Index(*t.find(a)));
  const Eigen::VectorXd y = t.vectors().row(Eigen::Index(*t.find(b)));
  return x.dot(y) / (x.norm() * y.norm());
}

}  // namespace

TEST_CASE("tokenizer splits words on whitespace and syllables on hyphens") {
  auto l = tokenize_lyrics("Yes-ter-day, all my trou-bles");
  CHECK(l.syllables == std::vector<std::string>{"yes", "ter", "day", "all", "my", "trou", "bles"});
  REQUIRE(l.word_spans.size() == 4);
  CHECK(l.word_spans[0] == std::pair<std::size_t, std::size_t>{0, 3});
  CHECK(l.word_spans[3] == std::pair<std::size_t, std::size_t>{5, 7});
  CHECK(l.word_of_each_syllable()[1] == "yesterday");
  CHECK_NOTHROW(l.validate());

  TokenizerOptions keep;
  keep.lowercase = false;
  keep.strip_punctuation = false;
  CHECK(tokenize_lyrics("Hi!", keep).syllables == std::vector<std::string>{"Hi!"});
  CHECK(tokenize_lyrics("  - -- ").syllables.empty());
}

TEST_CASE("skip-gram places exclusive co-occurring tokens closer than average") {
  // a and b only ever appear next to each other; c only next to c.
  std::vector<std::vector<std::string>> corpus;
  for (int i = 0; i < 200; ++i) {
    corpus.push_back({"a", "b", "a", "b"});
    corpus.push_back({"c", "c", "c"});
  }
  SkipGramConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 5;
  cfg.seed = 4;
  auto t = train_skipgram(corpus, cfg);
  REQUIRE(t.size() == 3);
  const double ab = cosine(t, "a", "b"), ac = cosine(t, "a", "c"), bc = cosine(t, "b", "c");
  CHECK(ab > (ab + ac + bc) / 3.0);
}

TEST_CASE("skip-gram is deterministic and inert on a single token") {
  std::vector<std::vector<std::string>> corpus = {{"x", "y", "z", "x"}, {"y", "z"}};
  SkipGramConfig cfg;
  cfg.dim = 6;
  auto a = train_skipgram(corpus, cfg), b = train_skipgram(corpus, cfg);
  CHECK(a.tokens() == b.tokens());
  CHECK(a.vectors() == b.vectors());
  cfg.seed = 2;
  CHECK(train_skipgram(corpus, cfg).vectors() != a.vectors());

  auto single = train_skipgram({{"solo"}}, cfg);
  REQUIRE(single.size() == 1);
  // untouched initialisation: uniform in (-0.5/dim, 0.5/dim)
  CHECK(single.vectors().cwiseAbs().maxCoeff() < 0.5 / cfg.dim);
  CHECK_THROWS_AS(train_skipgram({}, cfg), Error);
}

TEST_CASE("lyric embedding rows concatenate word and syllable vectors") {
  Eigen::MatrixXd wv(2, 2), sv(3, 3);
  wv << 1, 2, 3, 4;
  sv << 1, 0, 0, 0, 1, 0, 0, 0, 1;
  EmbeddingTable words({"lala", "hey"}, wv), syl({"la", "hey", "ho"}, sv);
  auto l = tokenize_lyrics("la-la hey zz");
  auto e = embed_lyrics(l, words, syl);
  REQUIRE(e.length() == 4);
  CHECK(e.vectors.cols() == 5);
  CHECK(e.vectors.row(0) == e.vectors.row(1));
  CHECK(e.vectors(2, 0) == 3);
  CHECK(e.vectors(2, 3) == 1);
  // unseen word and syllable fall back to the column means
  CHECK(e.vectors(3, 0) == doctest::Approx((1.0 + 3.0) / 2));
  CHECK(e.vectors(3, 1) == doctest::Approx((2.0 + 4.0) / 2));
  for (int k = 0; k < 3; ++k) CHECK(e.vectors(3, 2 + k) == doctest::Approx(1.0 / 3));
  CHECK(e.word_oov[3]);
  CHECK(e.syllable_oov[3]);
  CHECK_FALSE(e.word_oov[0]);
  CHECK(e.oov_count == 1);
}

TEST_CASE("embedding tables save, load and reject malformed files") {
  Eigen::MatrixXd v(2, 3);
  v << 0.5, -1, 2, 3, 4.25, -0.125;
  EmbeddingTable t({"a", "b"}, v);
  auto dir = fs::temp_directory_path() / "songsmith_embed";
  fs::create_directories(dir);
  t.save(dir / "t.txt");
  auto back = EmbeddingTable::load(dir / "t.txt");
  CHECK(back.tokens() == t.tokens());
  CHECK(back.vectors() == t.vectors());
  CHECK_NOTHROW(EmbeddingTable::load(dir / "t.txt", 3));

  CHECK_THROWS_WITH_AS(EmbeddingTable::load(temp_file("empty.txt", "")), "empty table", Error);
  try {
    EmbeddingTable::load(temp_file("ragged.txt", "2 3\na 1 2 3\nb 1 2\n"));
    FAIL("expected a parse failure");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 2 (b)") != std::string::npos);
  }
  try {
    EmbeddingTable::load(dir / "t.txt", 50);
    FAIL("expected a dimension mismatch");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("dimension mismatch") != std::string::npos);
  }
}

TEST_CASE("large tables parse to the advertised size") {
  std::string s = "1000 50\n";
  for (int i = 0; i < 1000; ++i) {
    s += "w" + std::to_string(i);
    for (int d = 0; d < 50; ++d) s += " 0.01";
    s += '\n';
  }
  auto t = EmbeddingTable::load(temp_file("big.txt", s), 50);
  CHECK(t.size() == 1000);
  CHECK(t.dim() == 50);
}
