#pragma once
// Check routines shared by unit tests and the acceptance binary.

#include <algorithm>

#include "oracles.hpp"
#include "songsmith/net/discriminator.hpp"
#include "songsmith/train/gumbel.hpp"

namespace checks {

using namespace songsmith;

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
  return m;
}

/// Worst group relative error of teacher-forced generator gradients.
inline oracle::GroupError generator_gradient_error(const ModelConfig& config, std::uint64_t seed, int T, int B) {
  Rng rng(seed);
  GeneratorParams g = init_generator(config, seed);
  oracle::jitter(g.params, rng, 0.3);
  auto batch = oracle::random_batch(config, T, B, rng);
  std::array<std::vector<Matrix>, kNumAttributes> weights;
  for (auto a : kAllAttributes) {
    for (int t = 0; t < T; ++t) weights[index_of(a)].push_back(random_matrix(config.branch(a).output_dim, B, rng));
  }
  auto loss = [&](ad::Tape& tape) {
    GeneratorBinding bind(tape, g);
    auto logits = teacher_forced_logits(bind, batch.inputs, batch.targets);
    std::vector<ad::Var> terms;
    for (auto a : kAllAttributes) {
      for (int t = 0; t < T; ++t) {
        terms.push_back(ad::sum_all(ad::mul(logits[index_of(a)][t], tape.constant(weights[index_of(a)][t]))));
      }
    }
    ad::Var total = terms[0];
    for (std::size_t i = 1; i < terms.size(); ++i) total = total + terms[i];
    return total;
  };
  oracle::GroupError worst{"", 0.0};
  for (const auto& e : oracle::check_gradients(g.params, loss)) {
    if (e.error >= worst.error) worst = e;
  }
  return worst;
}

/// Worst group relative error of discriminator gradients on simplex tokens.
inline oracle::GroupError discriminator_gradient_error(const ModelConfig& config, std::uint64_t seed, int T, int B) {
  Rng rng(seed);
  DiscriminatorParams d = init_discriminator(config, seed);
  oracle::jitter(d.params, rng, 0.3);
  auto batch = oracle::random_batch(config, T, B, rng);
  std::array<std::vector<Matrix>, kNumAttributes> tokens;
  for (auto a : kAllAttributes) {
    for (int t = 0; t < T; ++t) {
      Matrix p = random_matrix(config.branch(a).output_dim, B, rng).array().exp();
      for (int b = 0; b < B; ++b) p.col(b) /= p.col(b).sum();
      tokens[index_of(a)].push_back(p);
    }
  }
  const Matrix w = random_matrix(1, B, rng);
  auto loss = [&](ad::Tape& tape) {
    DiscriminatorBinding bind(tape, d);
    std::array<std::vector<ad::Var>, kNumAttributes> vars;
    for (auto a : kAllAttributes) {
      for (const auto& m : tokens[index_of(a)]) vars[index_of(a)].push_back(tape.constant(m));
    }
    return ad::sum_all(ad::mul(discriminator_score(bind, vars, batch.inputs), tape.constant(w)));
  };
  oracle::GroupError worst{"", 0.0};
  for (const auto& e : oracle::check_gradients(d.params, loss)) {
    if (e.error >= worst.error) worst = e;
  }
  return worst;
}

struct AblationResult {
  double forward = 0.0;   // max |logit difference|
  double backward = 0.0;  // max |gradient difference|
};

/// Zeroes every cross-branch fusion matrix, rolls the generator out
/// greedily and compares logits and gradients with the plain LSTM oracle.
inline AblationResult ablation_difference(const ModelConfig& config, std::uint64_t seed, int T, int B) {
  Rng rng(seed);
  GeneratorParams g = init_generator(config, seed);
  oracle::jitter(g.params, rng, 0.3);
  for (auto a : kAllAttributes) {
    for (auto src : kAllAttributes) {
      if (src == a) continue;
      g.params.at(gen_name(a, "in.U." + std::string(attribute_name(src)))).value.setZero();
      const std::string v = gen_name(a, "in.V." + std::string(attribute_name(src)));
      if (g.params.contains(v)) g.params.at(v).value.setZero();
    }
  }
  auto batch = oracle::random_batch(config, T, B, rng);
  std::array<std::vector<Matrix>, kNumAttributes> weights;
  for (auto a : kAllAttributes) {
    for (int t = 0; t < T; ++t) weights[index_of(a)].push_back(random_matrix(config.branch(a).output_dim, B, rng));
  }

  g.params.zero_grad();
  ad::Tape tape;
  GeneratorBinding bind(tape, g);
  Rollout ro = generator_rollout(bind, batch.inputs, greedy_sampler());
  std::vector<ad::Var> terms;
  for (auto a : kAllAttributes) {
    for (int t = 0; t < T; ++t) {
      terms.push_back(ad::sum_all(ad::mul(ro.logits[index_of(a)][t], tape.constant(weights[index_of(a)][t]))));
    }
  }
  ad::Var total = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) total = total + terms[i];
  tape.backward(total);

  AblationResult res;
  for (auto a : kAllAttributes) {
    const auto ai = index_of(a);
    const auto w = oracle::branch_weights(g, a);
    ref::BranchGrads sum;
    bool first = true;
    for (int b = 0; b < B; ++b) {
      std::vector<ref::Vec> lyr, lw;
      std::vector<int> prev;
      for (int t = 0; t < T; ++t) {
        lyr.push_back(batch.inputs.lyrics[t].col(b));
        lw.push_back(weights[ai][t].col(b));
        prev.push_back(t == 0 ? -1 : ro.classes[ai][t - 1][b]);
      }
      const ref::Vec rse = batch.inputs.rse[ai].col(b);
      auto run = ref::run_branch(w, lyr, prev, rse, lw);
      for (int t = 0; t < T; ++t) {
        res.forward = std::max(res.forward, (run.logits[t] - ro.logits[ai][t].value().col(b)).cwiseAbs().maxCoeff());
      }
      if (first) {
        sum = run.grads;
        first = false;
      } else {
        sum.E += run.grads.E; sum.start += run.grads.start; sum.Wy += run.grads.Wy; sum.by += run.grads.by;
        for (auto [dst, src] : {std::pair{&sum.in, &run.grads.in}, std::pair{&sum.out, &run.grads.out}}) {
          dst->Wi += src->Wi; dst->Wf += src->Wf; dst->Wo += src->Wo; dst->Wc += src->Wc;
          dst->Ui += src->Ui; dst->Uf += src->Uf; dst->Uo += src->Uo; dst->Uc += src->Uc;
          dst->bi += src->bi; dst->bf += src->bf; dst->bo += src->bo; dst->bc += src->bc;
        }
      }
    }
    for (const auto& [name, grad] : oracle::packed_grads(sum, config, a)) {
      res.backward = std::max(res.backward, (grad - g.params.at(name).grad).cwiseAbs().maxCoeff());
    }
  }
  return res;
}

}  // namespace checks
