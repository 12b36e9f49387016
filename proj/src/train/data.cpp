#include "songsmith/train/data.hpp"

#include <algorithm>
#include <map>

namespace songsmith {

EncodedSample encode_sample(const PairedSample& sample, const ModelBundle& model) {
  EncodedSample e;
  e.id = sample.id;
  e.lyrics = embed_lyrics(sample.lyrics, model.words, model.syllables).vectors;
  e.rse = build_rse(sample.style, model.discretizers);
  const auto enc = model.vocab.encode(sample.melody);
  for (Attribute a : kAllAttributes) {
    for (int k : enc[index_of(a)]) e.classes[index_of(a)].push_back(k - 1);
  }
  return e;
}

std::vector<EncodedSample> encode_samples(std::span<const PairedSample> samples, const ModelBundle& model) {
  std::vector<EncodedSample> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(encode_sample(s, model));
  return out;
}

Batch make_batch(std::span<const EncodedSample> data, std::span<const std::size_t> indices,
                 const ModelConfig& config) {
  if (indices.empty()) throw Error("make_batch: empty batch");
  std::vector<const Matrix*> lyrics;
  std::vector<const RseVector*> rse;
  for (std::size_t i : indices) {
    lyrics.push_back(&data[i].lyrics);
    rse.push_back(&data[i].rse);
  }
  Batch b;
  b.inputs = make_inputs(lyrics, rse, config);
  const std::size_t length = data[indices[0]].length();
  for (Attribute a : kAllAttributes) {
    auto& tg = b.targets[index_of(a)];
    tg.assign(length, std::vector<int>(indices.size()));
    std::vector<std::vector<int>> one_based;
    for (std::size_t c = 0; c < indices.size(); ++c) {
      const auto& cls = data[indices[c]].classes[index_of(a)];
      std::vector<int> seq;
      for (std::size_t t = 0; t < length; ++t) {
        tg[t][c] = cls[t];
        seq.push_back(cls[t] + 1);
      }
      one_based.push_back(std::move(seq));
    }
    if (length >= 2) b.stats[index_of(a)] = index_stats(one_based);
  }
  return b;
}

std::vector<std::vector<std::size_t>> plan_batches(std::span<const EncodedSample> data, int batch_size,
                                                   Rng* rng) {
  if (batch_size < 1) throw Error("batch size must be positive");
  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (rng) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng->below(i)]);
  }
  std::map<std::size_t, std::vector<std::size_t>> by_length;
  for (std::size_t i : order) by_length[data[i].length()].push_back(i);
  std::vector<std::vector<std::size_t>> batches;
  for (const auto& [len, idx] : by_length) {
    for (std::size_t s = 0; s < idx.size(); s += static_cast<std::size_t>(batch_size)) {
      const std::size_t e = std::min(idx.size(), s + static_cast<std::size_t>(batch_size));
      batches.emplace_back(idx.begin() + static_cast<std::ptrdiff_t>(s), idx.begin() + static_cast<std::ptrdiff_t>(e));
    }
  }
  return batches;
}

ModelBundle build_model(std::span<const PairedSample> train, std::span<const PairedSample> vocab_corpus,
                        EmbeddingTable words, EmbeddingTable syllables, const ModelSetup& setup) {
  if (train.empty()) throw Error("build_model: empty training split");
  std::vector<MelodySequence> melodies;
  for (const auto& s : vocab_corpus) melodies.push_back(s.melody);
  for (const auto& s : train) melodies.push_back(s.melody);
  VocabSet vocab = build_vocab(melodies);
  std::vector<StyleFeatures> feats;
  for (const auto& s : train) feats.push_back(s.style);
  DiscretizerSet disc = fit_discretizers(feats, setup.rules);

  ModelConfig config = setup.base;
  config.lyric_dim = words.dim() + syllables.dim();
  const auto sizes = vocab.sizes();
  for (Attribute a : kAllAttributes) {
    config.branch(a).output_dim = sizes[index_of(a)];
    config.branch(a).rse_dim = disc.rse_dim(a);
  }
  return {init_generator(config, setup.seed),
          init_discriminator(config, setup.seed),
          std::move(vocab),
          std::move(disc),
          std::move(words),
          std::move(syllables),
          setup.tokenizer};
}

}  // namespace songsmith
