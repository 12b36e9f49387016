#include "songsmith/net/discriminator.hpp"

#include <string>

namespace songsmith {

using ad::Var;

DiscriminatorBinding::DiscriminatorBinding(ad::Tape& tape, DiscriminatorParams& params)
    : tape_(&tape), config_(&params.config), params_(&params.params) {
  vars_.reserve(params.params.size());
  for (auto& p : params.params.all()) vars_.push_back(tape.parameter(p));
}

Var DiscriminatorBinding::operator()(std::string_view name) const {
  const auto& all = params_->all();
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].name == name) return vars_[i];
  }
  throw Error("discriminator has no parameter " + std::string(name));
}

Var discriminator_score(const DiscriminatorBinding& d,
                        const std::array<std::vector<Var>, kNumAttributes>& tokens,
                        const GenInputs& inputs) {
  const ModelConfig& cfg = d.config();
  const int length = inputs.length();
  const int batch = inputs.batch();
  if (length < 1) throw Error("discriminator_score: empty sequence");
  for (Attribute a : kAllAttributes) {
    const auto& seq = tokens[index_of(a)];
    if (static_cast<int>(seq.size()) != length) {
      throw Error("discriminator_score: sequences must share one length");
    }
    for (const Var& v : seq) {
      if (v.rows() != cfg.branch(a).output_dim || v.cols() != batch) {
        throw Error("discriminator_score: dimension mismatch in " + std::string(attribute_name(a)) + " tokens");
      }
    }
  }
  if (inputs.lyrics.front().rows() != cfg.lyric_dim) throw Error("discriminator_score: dimension mismatch in lyrics");

  std::vector<Var> rse;
  for (Attribute a : kAllAttributes) {
    if (cfg.branch(a).rse_dim > 0) rse.push_back(d.tape().constant(inputs.rse[index_of(a)]));
  }
  const Eigen::Index u = cfg.disc_units;
  Var h = d.tape().constant(Matrix::Zero(u, batch));
  Var c = d.tape().constant(Matrix::Zero(u, batch));
  for (int t = 0; t < length; ++t) {
    std::vector<Var> parts;
    for (Attribute a : kAllAttributes) {
      parts.push_back(ad::matmul(d("d.embed." + std::string(attribute_name(a))),
                                 tokens[index_of(a)][static_cast<std::size_t>(t)]));
    }
    parts.push_back(d.tape().constant(inputs.lyrics[static_cast<std::size_t>(t)]));
    parts.insert(parts.end(), rse.begin(), rse.end());
    const Var in = ad::tanh(ad::add_bias(ad::matmul(d("d.proj.W"), ad::concat_rows(parts)), d("d.proj.b")));
    const Var z = ad::add_bias(ad::add(ad::matmul(d("d.lstm.Wx"), in), ad::matmul(d("d.lstm.Wh"), h)),
                               d("d.lstm.b"));
    const Var s = ad::sigmoid(ad::slice_rows(z, 0, 3 * u));
    c = ad::add(ad::mul(ad::slice_rows(s, u, u), c),
                ad::mul(ad::slice_rows(s, 0, u), ad::tanh(ad::slice_rows(z, 3 * u, u))));
    h = ad::mul(ad::slice_rows(s, 2 * u, u), ad::tanh(c));
  }
  return ad::add_bias(ad::matmul(d("d.head.W"), h), d("d.head.b"));
}

}  // namespace songsmith
