#pragma once
// Test-side oracles: brute-force BLEU and melody metrics, central finite
// differences, and small fixtures. Deliberately naive.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "songsmith/core/corpus.hpp"
#include "songsmith/eval/bleu.hpp"
#include "songsmith/net/checkpoint.hpp"
#include "songsmith/net/memofu.hpp"
#include "songsmith/train/data.hpp"
#include "reference_lstm.hpp"

namespace oracle {

using songsmith::TokenSeq;

inline int occurrences(const TokenSeq& s, const TokenSeq& gram) {
  int c = 0;
  for (std::size_t i = 0; i + gram.size() <= s.size(); ++i) {
    bool eq = true;
    for (std::size_t k = 0; k < gram.size(); ++k) eq = eq && s[i + k] == gram[k];
    c += eq;
  }
  return c;
}

/// BLEU by exhaustive slicing: every hypothesis n-gram position is counted
/// once per distinct gram, clipped by its maximum reference count.
inline double bleu(const TokenSeq& hyp, const std::vector<TokenSeq>& refs, int n, double eps = 0.1) {
  if (hyp.empty()) return 0.0;
  double log_p = 0.0;
  for (int k = 1; k <= n; ++k) {
    std::vector<TokenSeq> seen;
    int matched = 0, total = 0;
    for (std::size_t i = 0; i + k <= hyp.size(); ++i) {
      TokenSeq g(hyp.begin() + i, hyp.begin() + i + k);
      ++total;
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      int max_ref = 0;
      for (const auto& r : refs) max_ref = std::max(max_ref, occurrences(r, g));
      matched += std::min(occurrences(hyp, g), max_ref);
    }
    if (k == 1 && matched == 0) return 0.0;
    const double denom = total > 0 ? total : 1;
    log_p += std::log(matched > 0 ? matched / denom : eps / denom) / n;
  }
  std::size_t best = refs[0].size();
  for (const auto& r : refs) {
    const long d = std::labs(long(r.size()) - long(hyp.size()));
    const long bd = std::labs(long(best) - long(hyp.size()));
    if (d < bd || (d == bd && r.size() < best)) best = r.size();
  }
  const double bp = hyp.size() > best ? 1.0 : std::exp(1.0 - double(best) / double(hyp.size()));
  return bp * std::exp(log_p);
}

inline double self_bleu(const std::vector<TokenSeq>& corpus, int n) {
  double s = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    std::vector<TokenSeq> refs;
    for (std::size_t j = 0; j < corpus.size(); ++j) {
      if (j != i) refs.push_back(corpus[j]);
    }
    s += bleu(corpus[i], refs, n);
  }
  return s / corpus.size();
}

/// Positions i whose pitch n-gram equals the n-gram at some j < i.
inline int repeated_positions(const std::vector<int>& p, int n) {
  int count = 0;
  for (int i = 1; i + n <= int(p.size()); ++i) {
    for (int j = 0; j < i; ++j) {
      bool eq = true;
      for (int k = 0; k < n; ++k) eq = eq && p[i + k] == p[j + k];
      if (eq) {
        ++count;
        break;
      }
    }
  }
  return count;
}

struct Metrics {
  double span, rep2, rep3, unique, restless, avg_rest, length;
};

inline Metrics metrics(const std::vector<songsmith::MelodySequence>& corpus) {
  Metrics m{0, 0, 0, 0, 0, 0, 0};
  for (const auto& s : corpus) {
    std::vector<int> p;
    for (const auto& n : s.notes) p.push_back(n.pitch);
    int lo = p[0], hi = p[0];
    for (int x : p) lo = std::min(lo, x), hi = std::max(hi, x);
    int unique = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      bool first = true;
      for (std::size_t j = 0; j < i; ++j) first = first && p[j] != p[i];
      unique += first;
    }
    double rests = 0, restless = 0, len = 0;
    for (const auto& n : s.notes) {
      rests += n.rest;
      restless += n.rest == 0.0 ? 1 : 0;
      len += n.duration + n.rest;
    }
    m.span += hi - lo;
    m.rep2 += repeated_positions(p, 2);
    m.rep3 += repeated_positions(p, 3);
    m.unique += unique;
    m.restless += restless;
    m.avg_rest += rests / s.notes.size();
    m.length += len;
  }
  const double n = corpus.size();
  return {m.span / n, m.rep2 / n, m.rep3 / n, m.unique / n, m.restless / n, m.avg_rest / n, m.length / n};
}

/// ||a - n|| / (||a|| + ||n||), 0 when both vanish.
inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& n) {
  const double den = a.norm() + n.norm();
  return den == 0.0 ? 0.0 : (a - n).norm() / den;
}

struct GroupError {
  std::string name;
  double error;
};

/// Compares tape gradients of `loss` against central differences for every
/// parameter of `params`. `loss` must build its graph on the given tape.
inline std::vector<GroupError> check_gradients(songsmith::ParamSet& params,
                                               const std::function<songsmith::ad::Var(songsmith::ad::Tape&)>& loss,
                                               double eps = 1e-4) {
  params.zero_grad();
  {
    songsmith::ad::Tape tape;
    tape.backward(loss(tape));
  }
  std::vector<GroupError> out;
  for (auto& p : params.all()) {
    const Eigen::MatrixXd analytic = p.grad;
    Eigen::MatrixXd numeric(p.value.rows(), p.value.cols());
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      const double orig = p.value.data()[k];
      p.value.data()[k] = orig + eps;
      songsmith::ad::Tape t1(false);
      const double up = loss(t1).value()(0, 0);
      p.value.data()[k] = orig - eps;
      songsmith::ad::Tape t2(false);
      const double down = loss(t2).value()(0, 0);
      p.value.data()[k] = orig;
      numeric.data()[k] = (up - down) / (2 * eps);
    }
    out.push_back({p.name, rel_error(analytic, numeric)});
  }
  return out;
}

/// Small random model configuration (hidden dims <= 8).
inline songsmith::ModelConfig small_config(songsmith::Rng& rng, bool fused = false) {
  songsmith::ModelConfig c;
  c.lyric_dim = 2 + int(rng.below(3));
  for (auto& b : c.branches) {
    b.embed_dim = 2 + int(rng.below(3));
    b.hidden_dim = 2 + int(rng.below(7));
    b.lstm_units = 2 + int(rng.below(7));
    b.output_dim = 2 + int(rng.below(4));
    b.rse_dim = 1 + int(rng.below(3));
  }
  c.disc_hidden = 2 + int(rng.below(4));
  c.disc_units = 2 + int(rng.below(4));
  c.fused_gates = fused;
  return c;
}

/// Random inputs and 0-based targets for a config.
struct RandomBatch {
  songsmith::GenInputs inputs;
  std::array<std::vector<std::vector<int>>, songsmith::kNumAttributes> targets;
};

inline RandomBatch random_batch(const songsmith::ModelConfig& c, int T, int B, songsmith::Rng& rng) {
  RandomBatch rb;
  for (int t = 0; t < T; ++t) {
    Eigen::MatrixXd x(c.lyric_dim, B);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1, 1);
    rb.inputs.lyrics.push_back(x);
  }
  for (auto a : songsmith::kAllAttributes) {
    const auto& br = c.branch(a);
    Eigen::MatrixXd r = Eigen::MatrixXd::Zero(br.rse_dim, B);
    for (int b = 0; b < B; ++b) r(int(rng.below(br.rse_dim)), b) = 1.0;
    rb.inputs.rse[songsmith::index_of(a)] = r;
    auto& tg = rb.targets[songsmith::index_of(a)];
    for (int t = 0; t < T; ++t) {
      std::vector<int> col;
      for (int b = 0; b < B; ++b) col.push_back(int(rng.below(br.output_dim)));
      tg.push_back(col);
    }
  }
  return rb;
}

/// Random perturbation of every parameter so no group sits at a special
/// value (zero biases, identity blocks).
inline void jitter(songsmith::ParamSet& params, songsmith::Rng& rng, double scale = 0.5) {
  for (auto& p : params.all()) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += rng.uniform(-scale, scale);
  }
}

/// Extracts the reference weights of one branch from generator params.
inline ref::BranchWeights branch_weights(const songsmith::GeneratorParams& g, songsmith::Attribute a) {
  using songsmith::gen_name;
  const auto& P = g.params;
  const auto& br = g.config.branch(a);
  const Eigen::Index h = br.hidden_dim, u = br.lstm_units;
  ref::BranchWeights w;
  w.E = P.at(gen_name(a, "embed")).value;
  w.start = P.at(gen_name(a, "start")).value.col(0);
  const auto& Wx = P.at(gen_name(a, "in.Wx")).value;
  const auto& Wh = P.at(gen_name(a, "in.Wh")).value;
  const auto& b = P.at(gen_name(a, "in.b")).value;
  w.in.Wi = Wx.middleRows(0, h); w.in.Wf = Wx.middleRows(h, h); w.in.Wo = Wx.middleRows(2 * h, h); w.in.Wc = Wx.middleRows(3 * h, h);
  w.in.Ui = Wh.middleRows(0, h); w.in.Uf = Wh.middleRows(h, h); w.in.Uo = Wh.middleRows(2 * h, h);
  w.in.Uc = P.at(gen_name(a, "in.U." + std::string(songsmith::attribute_name(a)))).value;
  w.in.bi = b.col(0).segment(0, h); w.in.bf = b.col(0).segment(h, h); w.in.bo = b.col(0).segment(2 * h, h); w.in.bc = b.col(0).segment(3 * h, h);
  const auto& Ox = P.at(gen_name(a, "out.Wx")).value;
  const auto& Oh = P.at(gen_name(a, "out.Wh")).value;
  const auto& ob = P.at(gen_name(a, "out.b")).value;
  w.out.Wi = Ox.middleRows(0, u); w.out.Wf = Ox.middleRows(u, u); w.out.Wo = Ox.middleRows(2 * u, u); w.out.Wc = Ox.middleRows(3 * u, u);
  w.out.Ui = Oh.middleRows(0, u); w.out.Uf = Oh.middleRows(u, u); w.out.Uo = Oh.middleRows(2 * u, u); w.out.Uc = Oh.middleRows(3 * u, u);
  w.out.bi = ob.col(0).segment(0, u); w.out.bf = ob.col(0).segment(u, u); w.out.bo = ob.col(0).segment(2 * u, u); w.out.bc = ob.col(0).segment(3 * u, u);
  w.Wy = P.at(gen_name(a, "head.W")).value;
  w.by = P.at(gen_name(a, "head.b")).value.col(0);
  return w;
}

/// Reassembles reference gradients into the generator's parameter layout.
inline std::vector<std::pair<std::string, Eigen::MatrixXd>> packed_grads(const ref::BranchGrads& g,
                                                                         const songsmith::ModelConfig& c,
                                                                         songsmith::Attribute a) {
  using songsmith::gen_name;
  const auto& br = c.branch(a);
  const Eigen::Index h = br.hidden_dim, u = br.lstm_units;
  Eigen::MatrixXd Wx(4 * h, g.in.Wi.cols()), Wh(3 * h, h), b(4 * h, 1);
  Wx << g.in.Wi, g.in.Wf, g.in.Wo, g.in.Wc;
  Wh << g.in.Ui, g.in.Uf, g.in.Uo;
  b << g.in.bi, g.in.bf, g.in.bo, g.in.bc;
  Eigen::MatrixXd Ox(4 * u, h), Oh(4 * u, u), ob(4 * u, 1);
  Ox << g.out.Wi, g.out.Wf, g.out.Wo, g.out.Wc;
  Oh << g.out.Ui, g.out.Uf, g.out.Uo, g.out.Uc;
  ob << g.out.bi, g.out.bf, g.out.bo, g.out.bc;
  return {{gen_name(a, "embed"), g.E},
          {gen_name(a, "start"), g.start},
          {gen_name(a, "in.Wx"), Wx},
          {gen_name(a, "in.Wh"), Wh},
          {gen_name(a, "in.U." + std::string(songsmith::attribute_name(a))), g.in.Uc},
          {gen_name(a, "in.b"), b},
          {gen_name(a, "out.Wx"), Ox},
          {gen_name(a, "out.Wh"), Oh},
          {gen_name(a, "out.b"), ob},
          {gen_name(a, "head.W"), g.Wy},
          {gen_name(a, "head.b"), g.by}};
}

/// Tiny trained-from-scratch bundle on the toy corpus (fast fixtures).
inline songsmith::ModelBundle tiny_bundle(const std::vector<songsmith::PairedSample>& train,
                                          const std::vector<songsmith::PairedSample>& all, std::uint64_t seed = 1) {
  using namespace songsmith;
  std::vector<LyricsSequence> ly;
  for (const auto& s : train) ly.push_back(s.lyrics);
  SkipGramConfig sg;
  sg.dim = 4;
  sg.epochs = 1;
  sg.seed = seed;
  ModelSetup setup;
  setup.seed = seed;
  for (auto& b : setup.base.branches) {
    b.embed_dim = 4;
    b.hidden_dim = 4;
    b.lstm_units = 6;
  }
  setup.base.disc_hidden = 4;
  setup.base.disc_units = 6;
  return build_model(train, all, train_skipgram(word_streams(ly), sg), train_skipgram(syllable_streams(ly), sg), setup);
}

}  // namespace oracle
