#include "songsmith/net/generate.hpp"

#include <map>

#include "songsmith/core/random.hpp"

namespace songsmith {

namespace {

// Local copy of the Gumbel-max draw to keep the net layer free of the
// training code: returns argmax(logits + g) per column.
std::vector<int> sample_columns(const Matrix& logits, std::vector<Rng>* rngs) {
  std::vector<int> out(static_cast<std::size_t>(logits.cols()));
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    Eigen::Index best = 0;
    double best_v = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      double v = logits(r, c);
      if (rngs) v += (*rngs)[static_cast<std::size_t>(c)].gumbel();
      if (r == 0 || v > best_v) {
        best = r;
        best_v = v;
      }
    }
    out[static_cast<std::size_t>(c)] = static_cast<int>(best);
  }
  return out;
}

std::vector<GenerationOutput> run(const ModelBundle& model, std::span<const GenerationItem> items,
                                  bool stochastic) {
  std::vector<GenerationOutput> results(items.size());
  // Group items by length; each group is one batched rollout.
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].lyrics.size() == 0) throw ValidationError("lyrics", "lyrics must contain at least one syllable");
    groups[items[i].lyrics.size()].push_back(i);
  }
  for (const auto& [length, idx] : groups) {
    std::vector<Matrix> lyric_mats;
    std::vector<const RseVector*> rse;
    std::vector<Rng> rngs;
    lyric_mats.reserve(idx.size());
    for (std::size_t i : idx) {
      const auto emb = embed_lyrics(items[i].lyrics, model.words, model.syllables);
      lyric_mats.push_back(emb.vectors);
      results[i].oov_count = emb.oov_count;
      rse.push_back(&items[i].rse);
      rngs.push_back(Rng::stream(items[i].seed, "generate"));
    }
    std::vector<const Matrix*> lyric_ptrs;
    for (const auto& m : lyric_mats) lyric_ptrs.push_back(&m);
    const GenInputs inputs = make_inputs(lyric_ptrs, rse, model.config());

    ad::Tape tape(false);
    GeneratorBinding g(tape, model.gen);
    const TokenSampler sampler = [&](ad::Var logits, Attribute, int) {
      TokenSample s;
      s.classes = sample_columns(logits.value(), stochastic ? &rngs : nullptr);
      s.token = tape.constant(one_hot(s.classes, static_cast<int>(logits.rows())));
      s.soft = s.token;
      return s;
    };
    const Rollout r = generator_rollout(g, inputs, sampler);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      auto& out = results[idx[b]];
      for (Attribute a : kAllAttributes) {
        auto& cls = out.classes[index_of(a)];
        for (std::size_t t = 0; t < length; ++t) cls.push_back(r.classes[index_of(a)][t][b] + 1);
      }
      out.melody = model.vocab.decode(out.classes[0], out.classes[1], out.classes[2]);
    }
  }
  return results;
}

}  // namespace

GenInputs make_inputs(std::span<const Matrix* const> lyrics, std::span<const RseVector* const> rse,
                      const ModelConfig& config) {
  if (lyrics.empty() || lyrics.size() != rse.size()) throw Error("make_inputs: batch mismatch");
  const Eigen::Index length = lyrics.front()->rows();
  const auto batch = static_cast<Eigen::Index>(lyrics.size());
  GenInputs in;
  in.lyrics.assign(static_cast<std::size_t>(length), Matrix(config.lyric_dim, batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const Matrix& m = *lyrics[static_cast<std::size_t>(b)];
    if (m.rows() != length) throw Error("make_inputs: sequences in a batch must share one length");
    if (m.cols() != config.lyric_dim) throw Error("make_inputs: lyric embedding dimension mismatch");
    for (Eigen::Index t = 0; t < length; ++t) in.lyrics[static_cast<std::size_t>(t)].col(b) = m.row(t).transpose();
  }
  for (Attribute a : kAllAttributes) {
    const int dim = config.branch(a).rse_dim;
    Matrix r(dim, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
      const auto& v = (*rse[static_cast<std::size_t>(b)])[a];
      if (static_cast<int>(v.size()) != dim) throw Error("make_inputs: rse dimension mismatch");
      for (int k = 0; k < dim; ++k) r(k, b) = v[static_cast<std::size_t>(k)];
    }
    in.rse[index_of(a)] = std::move(r);
  }
  return in;
}

std::vector<GenerationOutput> generate(const ModelBundle& model, std::span<const GenerationItem> items) {
  return run(model, items, true);
}

std::vector<GenerationOutput> generate_greedy(const ModelBundle& model,
                                              std::span<const GenerationItem> items) {
  return run(model, items, false);
}

}  // namespace songsmith
