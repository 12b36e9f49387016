#include "songsmith/eval/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>

namespace songsmith {

namespace {

using Counts = std::map<std::vector<std::int64_t>, int>;

Counts ngram_counts(const TokenSeq& s, int n) {
  Counts c;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= s.size(); ++i) {
    ++c[std::vector<std::int64_t>(s.begin() + static_cast<std::ptrdiff_t>(i),
                                  s.begin() + static_cast<std::ptrdiff_t>(i) + n)];
  }
  return c;
}

}  // namespace

double sentence_bleu(const TokenSeq& hyp, std::span<const TokenSeq> refs, int n, double epsilon) {
  if (n < 1) throw Error("bleu: order must be at least 1");
  if (refs.empty()) throw Error("bleu: no references");
  if (hyp.empty()) return 0.0;
  double log_sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    const Counts h = ngram_counts(hyp, k);
    Counts max_ref;
    for (const auto& r : refs) {
      for (const auto& [g, c] : ngram_counts(r, k)) max_ref[g] = std::max(max_ref[g], c);
    }
    int matched = 0, total = 0;
    for (const auto& [g, c] : h) {
      total += c;
      const auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    const double denom = std::max(1, total);
    if (k == 1 && matched == 0) return 0.0;
    const double p = matched > 0 ? matched / denom : epsilon / denom;
    log_sum += std::log(p) / static_cast<double>(n);
  }
  const auto c = static_cast<long>(hyp.size());
  long r = static_cast<long>(refs[0].size());
  for (const auto& ref : refs) {
    const long len = static_cast<long>(ref.size());
    if (std::labs(len - c) < std::labs(r - c) || (std::labs(len - c) == std::labs(r - c) && len < r)) r = len;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c));
  return bp * std::exp(log_sum);
}

double self_bleu(std::span<const TokenSeq> corpus, int n, double epsilon) {
  if (corpus.size() < 2) throw Error("self_bleu: at least two sequences required");
  double sum = 0.0;
  std::vector<TokenSeq> refs;
  refs.reserve(corpus.size() - 1);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    refs.clear();
    for (std::size_t j = 0; j < corpus.size(); ++j) {
      if (j != i) refs.push_back(corpus[j]);
    }
    sum += sentence_bleu(corpus[i], refs, n, epsilon);
  }
  return sum / static_cast<double>(corpus.size());
}

std::vector<double> self_bleu_orders(std::span<const TokenSeq> corpus, int max_n) {
  std::vector<double> out;
  for (int n = 1; n <= max_n; ++n) out.push_back(self_bleu(corpus, n));
  return out;
}

std::vector<TokenSeq> attribute_tokens(std::span<const MelodySequence> corpus, const VocabSet& vocab,
                                       Attribute a) {
  std::vector<TokenSeq> out;
  for (const auto& m : corpus) {
    const auto enc = vocab.encode(m);
    out.emplace_back(enc[index_of(a)].begin(), enc[index_of(a)].end());
  }
  return out;
}

std::vector<TokenSeq> triplet_tokens(std::span<const MelodySequence> corpus, const VocabSet& vocab) {
  std::vector<TokenSeq> out;
  const auto k = vocab.sizes();
  for (const auto& m : corpus) {
    const auto enc = vocab.encode(m);
    TokenSeq s;
    for (std::size_t t = 0; t < m.size(); ++t) {
      s.push_back((static_cast<std::int64_t>(enc[0][t]) * (k[1] + 1) + enc[1][t]) * (k[2] + 1) + enc[2][t]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace songsmith
