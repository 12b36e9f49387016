#include "songsmith/train/losses.hpp"

namespace songsmith {

using ad::Var;

namespace {

Var expected_index(const Var& p) {
  Matrix k(1, p.rows());
  for (Eigen::Index i = 0; i < p.rows(); ++i) k(0, i) = static_cast<double>(i + 1);
  return ad::matmul(p.tape()->constant(std::move(k)), p);
}

}  // namespace

Var seq_mean(std::span<const Var> probs) {
  if (probs.empty()) throw Error("seq_mean: empty sequence");
  Var sum = expected_index(probs[0]);
  for (std::size_t t = 1; t < probs.size(); ++t) sum = ad::add(sum, expected_index(probs[t]));
  return ad::divide(sum, static_cast<double>(probs.size()));
}

Var seq_var(std::span<const Var> probs) {
  if (probs.size() < 2) throw Error("seq_var: at least two steps required");
  const Var m = seq_mean(probs);
  Var sum = ad::square(ad::sub(expected_index(probs[0]), m));
  for (std::size_t t = 1; t < probs.size(); ++t) {
    sum = ad::add(sum, ad::square(ad::sub(expected_index(probs[t]), m)));
  }
  return ad::divide(sum, static_cast<double>(probs.size() - 1));
}

SeqStats index_stats(const std::vector<std::vector<int>>& seqs) {
  SeqStats s{Eigen::RowVectorXd(static_cast<Eigen::Index>(seqs.size())),
             Eigen::RowVectorXd(static_cast<Eigen::Index>(seqs.size()))};
  for (std::size_t b = 0; b < seqs.size(); ++b) {
    const auto& q = seqs[b];
    if (q.size() < 2) throw Error("index_stats: at least two steps required");
    double m = 0.0;
    for (int k : q) m += k;
    m /= static_cast<double>(q.size());
    double v = 0.0;
    for (int k : q) v += (k - m) * (k - m);
    s.mean(static_cast<Eigen::Index>(b)) = m;
    s.var(static_cast<Eigen::Index>(b)) = v / static_cast<double>(q.size() - 1);
  }
  return s;
}

Var seqloss(std::span<const Var> probs, const SeqStats& target, const SeqLossWeights& w) {
  if (probs.empty() || probs[0].cols() == 0) throw Error("seqloss: empty batch");
  if (target.mean.size() != probs[0].cols() || target.var.size() != probs[0].cols()) {
    throw Error("seqloss: target batch size mismatch");
  }
  ad::Tape& tape = *probs[0].tape();
  const Var dm = ad::sub(seq_mean(probs), tape.constant(target.mean));
  const Var dv = ad::sub(seq_var(probs), tape.constant(target.var));
  return ad::add(ad::scale(ad::mean_all(ad::square(dm)), w.alpha1),
                 ad::scale(ad::mean_all(ad::square(dv)), w.alpha2));
}

RsganLosses rsgan_losses(Var real_logits, Var fake_logits) {
  const Var diff = ad::sub(real_logits, fake_logits);
  return {ad::mean_all(ad::softplus(ad::scale(diff, -1.0))), ad::mean_all(ad::softplus(diff))};
}

Var sequence_cross_entropy(std::span<const Var> logits, const std::vector<std::vector<int>>& targets) {
  if (logits.empty() || logits.size() != targets.size()) {
    throw Error("sequence_cross_entropy: length mismatch");
  }
  Var sum = ad::cross_entropy(logits[0], targets[0]);
  for (std::size_t t = 1; t < logits.size(); ++t) sum = ad::add(sum, ad::cross_entropy(logits[t], targets[t]));
  return ad::scale(sum, 1.0 / static_cast<double>(logits.size()));
}

}  // namespace songsmith
