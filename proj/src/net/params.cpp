#include "songsmith/net/params.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

namespace songsmith {

Parameter& ParamSet::add(std::string name, Eigen::Index rows, Eigen::Index cols) {
  if (contains(name)) throw Error("duplicate parameter " + name);
  params_.push_back({std::move(name), Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)});
  return params_.back();
}

Parameter& ParamSet::at(std::string_view name) {
  for (auto& p : params_) {
    if (p.name == name) return p;
  }
  throw Error("no parameter named " + std::string(name));
}

const Parameter& ParamSet::at(std::string_view name) const {
  return const_cast<ParamSet*>(this)->at(name);
}

bool ParamSet::contains(std::string_view name) const {
  for (const auto& p : params_) {
    if (p.name == name) return true;
  }
  return false;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

double ParamSet::grad_norm() const {
  double ss = 0.0;
  for (const auto& p : params_) ss += p.grad.squaredNorm();
  return std::sqrt(ss);
}

double ParamSet::clip_grad_norm(double max_norm) {
  const double norm = grad_norm();
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto& p : params_) p.grad *= s;
  }
  return norm;
}

bool ParamSet::all_finite() const {
  for (const auto& p : params_) {
    if (!p.value.allFinite()) return false;
  }
  return true;
}

int ModelConfig::branch_input_dim(Attribute a) const {
  return lyric_dim + branch(a).embed_dim + branch(a).rse_dim;
}

int ModelConfig::total_rse_dim() const {
  int d = 0;
  for (const auto& b : branches) d += b.rse_dim;
  return d;
}

void ModelConfig::validate() const {
  if (lyric_dim < 1) throw Error("lyric_dim must be positive");
  for (Attribute a : kAllAttributes) {
    const auto& b = branch(a);
    if (b.embed_dim < 1 || b.hidden_dim < 1 || b.lstm_units < 1 || b.output_dim < 1 || b.rse_dim < 0) {
      throw Error("invalid dims for " + std::string(attribute_name(a)) + " branch");
    }
  }
  if (disc_hidden < 1 || disc_units < 1) throw Error("invalid discriminator dims");
}

nlohmann::json ModelConfig::to_json() const {
  nlohmann::json branches_json = nlohmann::json::object();
  for (Attribute a : kAllAttributes) {
    const auto& b = branch(a);
    branches_json[std::string(attribute_name(a))] = {{"embed_dim", b.embed_dim},
                                                     {"hidden_dim", b.hidden_dim},
                                                     {"lstm_units", b.lstm_units},
                                                     {"output_dim", b.output_dim},
                                                     {"rse_dim", b.rse_dim}};
  }
  return {{"lyric_dim", lyric_dim},
          {"branches", branches_json},
          {"disc_hidden", disc_hidden},
          {"disc_units", disc_units},
          {"fused_gates", fused_gates},
          {"start_policy", start_policy == StartTokenPolicy::kLearned ? "learned" : "zero"}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.lyric_dim = j.value("lyric_dim", c.lyric_dim);
  if (j.contains("branches")) {
    for (Attribute a : kAllAttributes) {
      const std::string key(attribute_name(a));
      if (!j["branches"].contains(key)) continue;
      const auto& bj = j["branches"][key];
      auto& b = c.branch(a);
      b.embed_dim = bj.value("embed_dim", b.embed_dim);
      b.hidden_dim = bj.value("hidden_dim", b.hidden_dim);
      b.lstm_units = bj.value("lstm_units", b.lstm_units);
      b.output_dim = bj.value("output_dim", b.output_dim);
      b.rse_dim = bj.value("rse_dim", b.rse_dim);
    }
  }
  c.disc_hidden = j.value("disc_hidden", c.disc_hidden);
  c.disc_units = j.value("disc_units", c.disc_units);
  c.fused_gates = j.value("fused_gates", c.fused_gates);
  const std::string policy = j.value("start_policy", std::string("learned"));
  if (policy != "learned" && policy != "zero") throw Error("unknown start_policy '" + policy + "'");
  c.start_policy = policy == "learned" ? StartTokenPolicy::kLearned : StartTokenPolicy::kZero;
  return c;
}

std::string ModelConfig::hash() const {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(to_json().dump());
  return os.str();
}

std::string gen_name(Attribute a, std::string_view suffix) {
  return std::string(attribute_name(a)) + "." + std::string(suffix);
}

namespace {

void glorot(Matrix& m, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-a, a);
  }
}

Matrix orthogonal(Eigen::Index n, Rng& rng) {
  Matrix g(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  }
  return q;
}

/// Stacked gate blocks of an n x n recurrent matrix, each orthogonal.
void orthogonal_blocks(Matrix& m, Rng& rng) {
  const Eigen::Index n = m.cols();
  for (Eigen::Index r = 0; r < m.rows(); r += n) m.middleRows(r, n) = orthogonal(n, rng);
}

// Gate row order in every fused gate matrix: input, forget, output, candidate.
void forget_bias(Matrix& b, Eigen::Index units) { b.middleRows(units, units).setConstant(1.0); }

}  // namespace

GeneratorParams init_generator(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  GeneratorParams g{config, {}};
  Rng rng = Rng::stream(seed, "init-generator");
  for (Attribute a : kAllAttributes) {
    const auto& b = config.branch(a);
    const Eigen::Index h = b.hidden_dim, u = b.lstm_units;
    glorot(g.params.add(gen_name(a, "embed"), b.embed_dim, b.output_dim).value, rng);
    auto& start = g.params.add(gen_name(a, "start"), b.embed_dim, 1).value;
    if (config.start_policy == StartTokenPolicy::kLearned) glorot(start, rng);
    glorot(g.params.add(gen_name(a, "in.Wx"), 4 * h, config.branch_input_dim(a)).value, rng);
    orthogonal_blocks(g.params.add(gen_name(a, "in.Wh"), 3 * h, h).value, rng);
    for (Attribute src : kAllAttributes) {
      auto& u_mat = g.params.add(gen_name(a, "in.U." + std::string(attribute_name(src))), h,
                                 config.branch(src).hidden_dim).value;
      if (src == a) {
        u_mat = orthogonal(h, rng);
      } else {
        glorot(u_mat, rng);
      }
    }
    if (config.fused_gates) {
      for (Attribute src : kAllAttributes) {
        if (src == a) continue;
        glorot(g.params.add(gen_name(a, "in.V." + std::string(attribute_name(src))), 3 * h,
                            config.branch(src).hidden_dim).value, rng);
      }
    }
    forget_bias(g.params.add(gen_name(a, "in.b"), 4 * h, 1).value, h);
    glorot(g.params.add(gen_name(a, "out.Wx"), 4 * u, h).value, rng);
    orthogonal_blocks(g.params.add(gen_name(a, "out.Wh"), 4 * u, u).value, rng);
    forget_bias(g.params.add(gen_name(a, "out.b"), 4 * u, 1).value, u);
    glorot(g.params.add(gen_name(a, "head.W"), b.output_dim, u).value, rng);
    g.params.add(gen_name(a, "head.b"), b.output_dim, 1);
  }
  return g;
}

DiscriminatorParams init_discriminator(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  DiscriminatorParams d{config, {}};
  Rng rng = Rng::stream(seed, "init-discriminator");
  int embed_total = 0;
  for (Attribute a : kAllAttributes) {
    const auto& b = config.branch(a);
    glorot(d.params.add("d.embed." + std::string(attribute_name(a)), b.embed_dim, b.output_dim).value, rng);
    embed_total += b.embed_dim;
  }
  const Eigen::Index hid = config.disc_hidden, u = config.disc_units;
  glorot(d.params.add("d.proj.W", hid, embed_total + config.lyric_dim + config.total_rse_dim()).value, rng);
  d.params.add("d.proj.b", hid, 1);
  glorot(d.params.add("d.lstm.Wx", 4 * u, hid).value, rng);
  orthogonal_blocks(d.params.add("d.lstm.Wh", 4 * u, u).value, rng);
  forget_bias(d.params.add("d.lstm.b", 4 * u, 1).value, u);
  glorot(d.params.add("d.head.W", 1, u).value, rng);
  d.params.add("d.head.b", 1, 1);
  return d;
}

void zero_params(ParamSet& params) {
  for (auto& p : params.all()) p.value.setZero();
}

}  // namespace songsmith
