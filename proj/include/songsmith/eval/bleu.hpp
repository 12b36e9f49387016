#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "songsmith/core/vocab.hpp"

namespace songsmith {

using TokenSeq = std::vector<std::int64_t>;

/// Sentence BLEU-n of `hypothesis` against several references: uniform
/// weights over orders 1..n, clipped counts (max over references),
/// brevity penalty against the closest reference length. A zero count at
/// some order is replaced by `epsilon` / (hypothesis n-gram count); no
/// unigram match at all gives 0.
double sentence_bleu(const TokenSeq& hypothesis, std::span<const TokenSeq> references, int n,
                     double epsilon = 0.1);

/// Mean BLEU-n of each sequence against all others. Needs >= 2 sequences.
double self_bleu(std::span<const TokenSeq> corpus, int n, double epsilon = 0.1);

/// Self-BLEU for n = 1..max_n.
std::vector<double> self_bleu_orders(std::span<const TokenSeq> corpus, int max_n = 4);

/// Token streams of a melody corpus: 1-based class indices of one
/// attribute, or triplet tokens combining all three.
std::vector<TokenSeq> attribute_tokens(std::span<const MelodySequence> corpus, const VocabSet& vocab,
                                       Attribute a);
std::vector<TokenSeq> triplet_tokens(std::span<const MelodySequence> corpus, const VocabSet& vocab);

}  // namespace songsmith
