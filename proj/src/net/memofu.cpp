#include "songsmith/net/memofu.hpp"

#include <string>

namespace songsmith {

using ad::Var;

GeneratorBinding::GeneratorBinding(ad::Tape& tape, GeneratorParams& params)
    : tape_(&tape), config_(&params.config), params_(&params.params) {
  vars_.reserve(params.params.size());
  for (auto& p : params.params.all()) vars_.push_back(tape.parameter(p));
}

GeneratorBinding::GeneratorBinding(ad::Tape& tape, const GeneratorParams& params)
    : tape_(&tape), config_(&params.config), params_(&params.params) {
  vars_.reserve(params.params.size());
  for (const auto& p : params.params.all()) vars_.push_back(tape.constant(p.value));
}

Var GeneratorBinding::operator()(Attribute a, std::string_view suffix) const {
  const std::string name = gen_name(a, suffix);
  const auto& all = params_->all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].name == name) return vars_[i];
  }
  throw Error("generator has no parameter " + name);
}

MemofuState zero_state(const GeneratorBinding& g, int batch) {
  MemofuState s;
  for (Attribute a : kAllAttributes) {
    const auto& b = g.config().branch(a);
    auto& st = s.branch[index_of(a)];
    st.c_in = g.tape().constant(Matrix::Zero(b.hidden_dim, batch));
    st.h_in = g.tape().constant(Matrix::Zero(b.hidden_dim, batch));
    st.c_out = g.tape().constant(Matrix::Zero(b.lstm_units, batch));
    st.h_out = g.tape().constant(Matrix::Zero(b.lstm_units, batch));
  }
  return s;
}

Matrix one_hot(std::span<const int> classes, int k) {
  Matrix m = Matrix::Zero(k, static_cast<Eigen::Index>(classes.size()));
  for (std::size_t b = 0; b < classes.size(); ++b) {
    if (classes[b] < 0 || classes[b] >= k) throw Error("one_hot: class out of range");
    m(classes[b], static_cast<Eigen::Index>(b)) = 1.0;
  }
  return m;
}

namespace {

void check_shape(const Var& v, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (v.rows() != rows || v.cols() != cols) {
    throw Error(std::string("memofu_step: dimension mismatch in ") + what);
  }
}

Var previous_embedding(const GeneratorBinding& g, Attribute a, const Var& prev, int batch) {
  if (prev.valid()) return ad::matmul(g(a, "embed"), prev);
  if (g.config().start_policy == StartTokenPolicy::kZero) {
    return g.tape().constant(Matrix::Zero(g.config().branch(a).embed_dim, batch));
  }
  return ad::broadcast_cols(g(a, "start"), batch);
}

}  // namespace

StepOutput memofu_step(const GeneratorBinding& g, const MemofuState& state, Var x_t,
                       const std::array<Var, kNumAttributes>& prev_tokens,
                       const std::array<Var, kNumAttributes>& rse) {
  const ModelConfig& cfg = g.config();
  const int batch = static_cast<int>(x_t.cols());
  check_shape(x_t, cfg.lyric_dim, batch, "lyric input");
  for (Attribute a : kAllAttributes) {
    const auto& b = cfg.branch(a);
    const auto& st = state[a];
    check_shape(st.h_in, b.hidden_dim, batch, "fusion state");
    check_shape(st.h_out, b.lstm_units, batch, "output state");
    if (prev_tokens[index_of(a)].valid()) {
      check_shape(prev_tokens[index_of(a)], b.output_dim, batch, "previous tokens");
    }
    if (b.rse_dim > 0) check_shape(rse[index_of(a)], b.rse_dim, batch, "rse");
    if (!st.h_in.value().allFinite() || !st.c_in.value().allFinite() ||
        !st.h_out.value().allFinite() || !st.c_out.value().allFinite()) {
      throw Error("memofu_step: non-finite state");
    }
  }

  StepOutput out;
  for (Attribute a : kAllAttributes) {
    const auto& b = cfg.branch(a);
    const auto& st = state[a];
    const Eigen::Index h = b.hidden_dim, u = b.lstm_units;

    std::vector<Var> parts{x_t, previous_embedding(g, a, prev_tokens[index_of(a)], batch)};
    if (b.rse_dim > 0) parts.push_back(rse[index_of(a)]);
    const Var input = ad::concat_rows(parts);

    // Fusion layer. Gates read the own-branch state; the candidate sums
    // contributions of every branch's previous fusion state.
    const Var zx = ad::add_bias(ad::matmul(g(a, "in.Wx"), input), g(a, "in.b"));
    Var gates = ad::add(ad::slice_rows(zx, 0, 3 * h), ad::matmul(g(a, "in.Wh"), st.h_in));
    Var cand = ad::slice_rows(zx, 3 * h, h);
    for (Attribute src : kAllAttributes) {
      const std::string src_name(attribute_name(src));
      cand = ad::add(cand, ad::matmul(g(a, "in.U." + src_name), state[src].h_in));
      if (cfg.fused_gates && src != a) {
        gates = ad::add(gates, ad::matmul(g(a, "in.V." + src_name), state[src].h_in));
      }
    }
    const Var sg = ad::sigmoid(gates);
    const Var i_in = ad::slice_rows(sg, 0, h);
    const Var f_in = ad::slice_rows(sg, h, h);
    const Var o_in = ad::slice_rows(sg, 2 * h, h);
    const Var c_in = ad::add(ad::mul(f_in, st.c_in), ad::mul(i_in, ad::tanh(cand)));
    const Var h_in = ad::mul(o_in, ad::tanh(c_in));

    // Output layer: plain LSTM over the fusion-layer output.
    const Var zo = ad::add_bias(
        ad::add(ad::matmul(g(a, "out.Wx"), h_in), ad::matmul(g(a, "out.Wh"), st.h_out)),
        g(a, "out.b"));
    const Var so = ad::sigmoid(ad::slice_rows(zo, 0, 3 * u));
    const Var c_out = ad::add(ad::mul(ad::slice_rows(so, u, u), st.c_out),
                              ad::mul(ad::slice_rows(so, 0, u), ad::tanh(ad::slice_rows(zo, 3 * u, u))));
    const Var h_out = ad::mul(ad::slice_rows(so, 2 * u, u), ad::tanh(c_out));

    out.state.branch[index_of(a)] = {c_in, h_in, c_out, h_out};
    out.logits[index_of(a)] =
        ad::add_bias(ad::matmul(g(a, "head.W"), h_out), g(a, "head.b"));
  }
  return out;
}

namespace {

std::array<Var, kNumAttributes> rse_vars(const GeneratorBinding& g, const GenInputs& inputs) {
  std::array<Var, kNumAttributes> rse;
  for (Attribute a : kAllAttributes) {
    if (g.config().branch(a).rse_dim > 0) rse[index_of(a)] = g.tape().constant(inputs.rse[index_of(a)]);
  }
  return rse;
}

}  // namespace

Rollout generator_rollout(const GeneratorBinding& g, const GenInputs& inputs,
                          const TokenSampler& sampler) {
  const int length = inputs.length();
  if (length < 1) throw Error("generator_rollout: length must be at least 1");
  const int batch = inputs.batch();
  const auto rse = rse_vars(g, inputs);
  MemofuState state = zero_state(g, batch);
  std::array<Var, kNumAttributes> prev{};
  Rollout r;
  for (int t = 0; t < length; ++t) {
    StepOutput step = memofu_step(g, state, g.tape().constant(inputs.lyrics[static_cast<std::size_t>(t)]),
                                  prev, rse);
    for (Attribute a : kAllAttributes) {
      const std::size_t ai = index_of(a);
      TokenSample s = sampler(step.logits[ai], a, t);
      r.logits[ai].push_back(step.logits[ai]);
      r.soft[ai].push_back(s.soft);
      r.tokens[ai].push_back(s.token);
      prev[ai] = g.tape().constant(s.token.value());
      r.classes[ai].push_back(std::move(s.classes));
    }
    state = std::move(step.state);
  }
  return r;
}

std::array<std::vector<Var>, kNumAttributes> teacher_forced_logits(
    const GeneratorBinding& g, const GenInputs& inputs,
    const std::array<std::vector<std::vector<int>>, kNumAttributes>& targets) {
  const int length = inputs.length();
  const int batch = inputs.batch();
  for (const auto& tg : targets) {
    if (static_cast<int>(tg.size()) != length) throw Error("teacher forcing: target length mismatch");
  }
  const auto rse = rse_vars(g, inputs);
  MemofuState state = zero_state(g, batch);
  std::array<Var, kNumAttributes> prev{};
  std::array<std::vector<Var>, kNumAttributes> logits;
  for (int t = 0; t < length; ++t) {
    StepOutput step = memofu_step(g, state, g.tape().constant(inputs.lyrics[static_cast<std::size_t>(t)]),
                                  prev, rse);
    for (Attribute a : kAllAttributes) {
      const std::size_t ai = index_of(a);
      logits[ai].push_back(step.logits[ai]);
      prev[ai] = g.tape().constant(
          one_hot(targets[ai][static_cast<std::size_t>(t)], g.config().branch(a).output_dim));
    }
    state = std::move(step.state);
  }
  return logits;
}

}  // namespace songsmith
