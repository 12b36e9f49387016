#include "songsmith/train/trainer.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "songsmith/eval/bleu.hpp"
#include "songsmith/eval/metrics.hpp"
#include "songsmith/net/discriminator.hpp"
#include "songsmith/train/gumbel.hpp"

namespace songsmith {

using nlohmann::json;

std::string loss_mode_name(LossMode m) {
  switch (m) {
    case LossMode::kRsganSeqloss: return "rsgan+seqloss";
    case LossMode::kRsganOnly: return "rsgan";
    case LossMode::kRsganCe: return "rsgan+ce";
  }
  return "";
}

LossMode parse_loss_mode(std::string_view name) {
  for (LossMode m : {LossMode::kRsganSeqloss, LossMode::kRsganOnly, LossMode::kRsganCe}) {
    if (loss_mode_name(m) == name) return m;
  }
  throw ValidationError("mode", "unknown loss mode '" + std::string(name) + "'");
}

json TrainConfig::to_json() const {
  return {{"pretrain_epochs", pretrain_epochs},
          {"adversarial_epochs", adversarial_epochs},
          {"batch_size", batch_size},
          {"pretrain_lr", pretrain_lr},
          {"generator_lr", generator_lr},
          {"discriminator_lr", discriminator_lr},
          {"beta1", beta1},
          {"beta2", beta2},
          {"grad_clip", grad_clip},
          {"tau_max", tau_max},
          {"inverse_temperature", inverse_temperature},
          {"alpha1", seqloss.alpha1},
          {"alpha2", seqloss.alpha2},
          {"ce_weight", ce_weight},
          {"mode", loss_mode_name(mode)},
          {"seed", seed},
          {"checkpoint_every", checkpoint_every},
          {"checkpoint_dir", checkpoint_dir.string()},
          {"log_path", log_path.string()},
          {"validation_limit", validation_limit}};
}

TrainConfig TrainConfig::from_json(const json& j) {
  TrainConfig c;
  const json defaults = c.to_json();
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) throw ValidationError(key, "unknown training option '" + key + "'");
  }
  try {
    c.pretrain_epochs = j.value("pretrain_epochs", c.pretrain_epochs);
    c.adversarial_epochs = j.value("adversarial_epochs", c.adversarial_epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.pretrain_lr = j.value("pretrain_lr", c.pretrain_lr);
    c.generator_lr = j.value("generator_lr", c.generator_lr);
    c.discriminator_lr = j.value("discriminator_lr", c.discriminator_lr);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.grad_clip = j.value("grad_clip", c.grad_clip);
    c.tau_max = j.value("tau_max", c.tau_max);
    c.inverse_temperature = j.value("inverse_temperature", c.inverse_temperature);
    c.seqloss.alpha1 = j.value("alpha1", c.seqloss.alpha1);
    c.seqloss.alpha2 = j.value("alpha2", c.seqloss.alpha2);
    c.ce_weight = j.value("ce_weight", c.ce_weight);
    c.mode = parse_loss_mode(j.value("mode", loss_mode_name(c.mode)));
    c.seed = j.value("seed", c.seed);
    c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
    c.checkpoint_dir = j.value("checkpoint_dir", std::string());
    c.log_path = j.value("log_path", std::string());
    c.validation_limit = j.value("validation_limit", c.validation_limit);
  } catch (const json::exception& e) {
    throw ValidationError("config", std::string("bad training option type: ") + e.what());
  }
  c.validate();
  return c;
}

void TrainConfig::validate() const {
  if (pretrain_epochs < 0) throw ValidationError("pretrain_epochs", "pretrain_epochs must be >= 0");
  if (adversarial_epochs < 0) throw ValidationError("adversarial_epochs", "adversarial_epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size", "batch_size must be positive");
  if (!(pretrain_lr > 0) || !(generator_lr > 0) || !(discriminator_lr > 0)) {
    throw ValidationError("learning_rate", "learning rates must be positive");
  }
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) throw ValidationError("beta", "betas must lie in (0,1)");
  if (!(grad_clip > 0)) throw ValidationError("grad_clip", "grad_clip must be positive");
  if (!(tau_max >= 1)) throw ValidationError("tau_max", "tau_max must be >= 1");
  if (seqloss.alpha1 < 0 || seqloss.alpha2 < 0) throw ValidationError("alpha", "SeqLoss weights must be >= 0");
  if (checkpoint_every < 0) throw ValidationError("checkpoint_every", "checkpoint_every must be >= 0");
}

json EpochRecord::to_json() const {
  json j = {{"phase", phase}, {"epoch", epoch}, {"global_epoch", global_epoch}, {"steps", steps}};
  if (phase == "pretrain") {
    j["ce"] = ce;
  } else {
    j["g_loss"] = g_loss;
    j["d_loss"] = d_loss;
    j["tau"] = tau;
    j["mode"] = mode;
    if (mode == loss_mode_name(LossMode::kRsganSeqloss)) {
      j["seqloss"] = {{"pitch", seqloss[0]}, {"duration", seqloss[1]}, {"rest", seqloss[2]}};
    }
    if (mode == loss_mode_name(LossMode::kRsganCe)) j["ce"] = ce;
  }
  if (!self_bleu.empty()) j["self_bleu"] = self_bleu;
  if (!style_mse.empty()) j["style_mse"] = style_mse;
  return j;
}

EpochRecord EpochRecord::from_json(const json& j) {
  EpochRecord r;
  r.phase = j.at("phase").get<std::string>();
  r.mode = j.value("mode", std::string());
  r.epoch = j.at("epoch").get<int>();
  r.global_epoch = j.at("global_epoch").get<int>();
  r.steps = j.at("steps").get<int>();
  r.ce = j.value("ce", 0.0);
  r.g_loss = j.value("g_loss", 0.0);
  r.d_loss = j.value("d_loss", 0.0);
  r.tau = j.value("tau", 0.0);
  if (j.contains("seqloss")) {
    r.seqloss = {j["seqloss"]["pitch"].get<double>(), j["seqloss"]["duration"].get<double>(),
                 j["seqloss"]["rest"].get<double>()};
  }
  r.self_bleu = j.value("self_bleu", std::vector<double>{});
  r.style_mse = j.value("style_mse", std::vector<double>{});
  return r;
}

Trainer::Trainer(ModelBundle& model, TrainConfig config, std::vector<EncodedSample> train,
                 std::vector<EncodedSample> valid, std::vector<MelodySequence> valid_melodies)
    : model_(model),
      config_(std::move(config)),
      train_(std::move(train)),
      valid_(std::move(valid)),
      valid_melodies_(std::move(valid_melodies)),
      pre_(model.gen.params, {config_.pretrain_lr, config_.beta1, config_.beta2}),
      gen_(model.gen.params, {config_.generator_lr, config_.beta1, config_.beta2}),
      disc_(model.disc.params, {config_.discriminator_lr, config_.beta1, config_.beta2}),
      shuffle_rng_(Rng::stream(config_.seed, "shuffle")),
      gumbel_rng_(Rng::stream(config_.seed, "gumbel")) {
  config_.validate();
  if (train_.empty()) throw Error("trainer: empty training split");
  if (!valid_melodies_.empty() && valid_melodies_.size() != valid_.size()) {
    throw Error("trainer: validation melodies must align with validation samples");
  }
}

void Trainer::guard(double value, const char* what) {
  if (std::isfinite(value) && model_.gen.params.all_finite() && model_.disc.params.all_finite()) return;
  std::ostringstream msg;
  msg << "non-finite " << what << " (pretrain epochs done " << pretrain_done_ << ", adversarial epochs done "
      << adversarial_done_ << ")";
  if (!config_.checkpoint_dir.empty()) {
    const auto path = config_.checkpoint_dir / "diverged.ckpt";
    save(path);
    msg << "; snapshot written to " << path.string();
  }
  throw DivergenceError(msg.str());
}

double Trainer::ce_pretrain_epoch() {
  const auto batches = plan_batches(train_, config_.batch_size, &shuffle_rng_);
  double total = 0.0;
  for (const auto& idx : batches) {
    const Batch batch = make_batch(train_, idx, model_.config());
    ad::Tape tape;
    GeneratorBinding g(tape, model_.gen);
    const auto logits = teacher_forced_logits(g, batch.inputs, batch.targets);
    ad::Var loss;
    for (Attribute a : kAllAttributes) {
      const ad::Var ce = sequence_cross_entropy(logits[index_of(a)], batch.targets[index_of(a)]);
      loss = loss.valid() ? ad::add(loss, ce) : ce;
    }
    guard(loss.value()(0, 0), "CE loss");
    model_.gen.params.zero_grad();
    tape.backward(loss);
    model_.gen.params.clip_grad_norm(config_.grad_clip);
    pre_.step(model_.gen.params);
    guard(loss.value()(0, 0), "generator parameter");
    total += loss.value()(0, 0) * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(train_.size());
}

EpochRecord Trainer::adversarial_epoch(int epoch) {
  EpochRecord rec;
  rec.phase = "adversarial";
  rec.mode = loss_mode_name(config_.mode);
  rec.epoch = epoch;
  rec.tau = temperature_at(epoch, config_.adversarial_epochs, config_.tau_max);
  const auto batches = plan_batches(train_, config_.batch_size, &shuffle_rng_);
  double n = 0.0;
  for (const auto& idx : batches) {
    const Batch batch = make_batch(train_, idx, model_.config());
    ad::Tape tape;
    GeneratorBinding g(tape, model_.gen);
    DiscriminatorBinding d(tape, model_.disc);
    const Rollout r = generator_rollout(g, batch.inputs,
                                        gumbel_sampler(rec.tau, gumbel_rng_, config_.inverse_temperature));

    std::array<std::vector<ad::Var>, kNumAttributes> real, fake_detached;
    for (Attribute a : kAllAttributes) {
      const std::size_t ai = index_of(a);
      const int k = model_.config().branch(a).output_dim;
      for (std::size_t t = 0; t < r.tokens[ai].size(); ++t) {
        real[ai].push_back(tape.constant(one_hot(batch.targets[ai][t], k)));
        fake_detached[ai].push_back(tape.constant(r.tokens[ai][t].value()));
      }
    }
    const ad::Var c_real = discriminator_score(d, real, batch.inputs);
    const ad::Var d_loss = rsgan_losses(c_real, discriminator_score(d, fake_detached, batch.inputs)).d_loss;
    const ad::Var g_loss = rsgan_losses(c_real, discriminator_score(d, r.tokens, batch.inputs)).g_loss;

    ad::Var g_total = g_loss;
    std::array<double, kNumAttributes> seq{};
    if (config_.mode == LossMode::kRsganSeqloss && batch.inputs.length() >= 2) {
      for (Attribute a : kAllAttributes) {
        const ad::Var s = seqloss(r.soft[index_of(a)], batch.stats[index_of(a)], config_.seqloss);
        seq[index_of(a)] = s.value()(0, 0);
        g_total = ad::add(g_total, s);
      }
    }
    double ce_value = 0.0;
    if (config_.mode == LossMode::kRsganCe) {
      const auto logits = teacher_forced_logits(g, batch.inputs, batch.targets);
      for (Attribute a : kAllAttributes) {
        const ad::Var ce = sequence_cross_entropy(logits[index_of(a)], batch.targets[index_of(a)]);
        ce_value += ce.value()(0, 0);
        g_total = ad::add(g_total, ad::scale(ce, config_.ce_weight));
      }
    }
    guard(d_loss.value()(0, 0), "discriminator loss");
    guard(g_total.value()(0, 0), "generator loss");

    model_.disc.params.zero_grad();
    tape.backward(d_loss);
    model_.disc.params.clip_grad_norm(config_.grad_clip);
    disc_.step(model_.disc.params);

    model_.gen.params.zero_grad();
    tape.backward(g_total);
    model_.gen.params.clip_grad_norm(config_.grad_clip);
    gen_.step(model_.gen.params);
    guard(g_total.value()(0, 0), "parameter");

    const double w = static_cast<double>(idx.size());
    rec.g_loss += g_loss.value()(0, 0) * w;
    rec.d_loss += d_loss.value()(0, 0) * w;
    rec.ce += ce_value * w;
    for (std::size_t a = 0; a < kNumAttributes; ++a) rec.seqloss[a] += seq[a] * w;
    n += w;
    ++rec.steps;
  }
  rec.g_loss /= n;
  rec.d_loss /= n;
  rec.ce /= n;
  for (double& s : rec.seqloss) s /= n;
  return rec;
}

void Trainer::validate_epoch(EpochRecord& rec) const {
  const std::size_t n = std::min(config_.validation_limit, valid_.size());
  if (n < 2) return;
  std::vector<const Matrix*> lyrics;
  std::vector<const RseVector*> rse;
  for (std::size_t i = 0; i < n; ++i) {
    lyrics.push_back(&valid_[i].lyrics);
    rse.push_back(&valid_[i].rse);
  }
  std::vector<MelodySequence> generated(n);
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[valid_[i].length()].push_back(i);
  for (const auto& [len, idx] : groups) {
    std::vector<const Matrix*> l;
    std::vector<const RseVector*> s;
    std::vector<Rng> rngs;
    for (std::size_t i : idx) {
      l.push_back(lyrics[i]);
      s.push_back(rse[i]);
      rngs.push_back(Rng::stream(config_.seed + static_cast<std::uint64_t>(rec.global_epoch) * 7919ULL + i,
                                 "validation"));
    }
    const GenInputs inputs = make_inputs(l, s, model_.config());
    ad::Tape tape(false);
    GeneratorBinding g(tape, model_.gen);
    const TokenSampler sampler = [&](ad::Var logits, Attribute, int) {
      Matrix noise(logits.rows(), logits.cols());
      for (Eigen::Index c = 0; c < noise.cols(); ++c) {
        for (Eigen::Index k = 0; k < noise.rows(); ++k) noise(k, c) = rngs[static_cast<std::size_t>(c)].gumbel();
      }
      return gumbel_softmax_st(logits, 1.0, noise);
    };
    const Rollout r = generator_rollout(g, inputs, sampler);
    for (std::size_t b = 0; b < idx.size(); ++b) {
      std::array<std::vector<int>, kNumAttributes> cls;
      for (Attribute a : kAllAttributes) {
        for (std::size_t t = 0; t < len; ++t) cls[index_of(a)].push_back(r.classes[index_of(a)][t][b] + 1);
      }
      generated[idx[b]] = model_.vocab.decode(cls[0], cls[1], cls[2]);
    }
  }
  rec.self_bleu = self_bleu_orders(triplet_tokens(generated, model_.vocab), 4);
  if (!valid_melodies_.empty()) {
    const std::vector<MelodySequence> ref(valid_melodies_.begin(),
                                          valid_melodies_.begin() + static_cast<std::ptrdiff_t>(n));
    bool long_enough = true;
    for (const auto& m : ref) long_enough = long_enough && m.size() >= 2;
    if (long_enough) {
      const auto mse = style_mse(generated, ref);
      rec.style_mse.assign(mse.begin(), mse.end());
    }
  }
}

void Trainer::finish_epoch(EpochRecord rec, const std::function<void(const EpochRecord&)>& on_epoch) {
  rec.global_epoch = pretrain_done_ + adversarial_done_;
  validate_epoch(rec);
  history_.push_back(rec);
  if (!config_.log_path.empty()) {
    if (config_.log_path.has_parent_path()) std::filesystem::create_directories(config_.log_path.parent_path());
    std::ofstream log(config_.log_path, std::ios::app);
    log << rec.to_json().dump() << "\n";
  }
  if (config_.checkpoint_every > 0 && !config_.checkpoint_dir.empty() &&
      rec.global_epoch % config_.checkpoint_every == 0) {
    std::ostringstream name;
    name << "epoch-" << std::setw(4) << std::setfill('0') << rec.global_epoch << ".ckpt";
    save(config_.checkpoint_dir / name.str());
  }
  if (on_epoch) on_epoch(rec);
}

void Trainer::train(const std::function<void(const EpochRecord&)>& on_epoch) {
  while (pretrain_done_ < config_.pretrain_epochs) {
    EpochRecord rec;
    rec.phase = "pretrain";
    rec.epoch = pretrain_done_;
    rec.ce = ce_pretrain_epoch();
    rec.steps = static_cast<int>(plan_batches(train_, config_.batch_size, nullptr).size());
    ++pretrain_done_;
    finish_epoch(std::move(rec), on_epoch);
  }
  while (adversarial_done_ < config_.adversarial_epochs) {
    EpochRecord rec = adversarial_epoch(adversarial_done_);
    ++adversarial_done_;
    finish_epoch(std::move(rec), on_epoch);
  }
  if (!config_.checkpoint_dir.empty()) save(config_.checkpoint_dir / "final.ckpt");
}

namespace {

void put_adam(TrainSnapshot& snap, const std::string& name, const Adam& opt) {
  snap.state["adam"][name] = opt.steps();
  for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
    snap.tensors.emplace_back("adam." + name + ".m." + std::to_string(i), opt.first_moments()[i]);
    snap.tensors.emplace_back("adam." + name + ".v." + std::to_string(i), opt.second_moments()[i]);
  }
}

void get_adam(const TrainSnapshot& snap, const std::string& name, Adam& opt) {
  auto find = [&](const std::string& key) -> const Matrix& {
    for (const auto& [n, m] : snap.tensors) {
      if (n == key) return m;
    }
    throw Error("checkpoint: missing optimizer tensor " + key);
  };
  std::vector<Matrix> m, v;
  for (std::size_t i = 0; i < opt.first_moments().size(); ++i) {
    m.push_back(find("adam." + name + ".m." + std::to_string(i)));
    v.push_back(find("adam." + name + ".v." + std::to_string(i)));
  }
  opt.restore(snap.state.at("adam").at(name).get<long>(), std::move(m), std::move(v));
}

}  // namespace

TrainSnapshot Trainer::snapshot() const {
  TrainSnapshot snap;
  snap.state["pretrain_done"] = pretrain_done_;
  snap.state["adversarial_done"] = adversarial_done_;
  snap.state["epoch"] = pretrain_done_ + adversarial_done_;
  snap.state["phase"] = pretrain_done_ < config_.pretrain_epochs ? "pretrain" : "adversarial";
  snap.state["rng"] = {{"shuffle", shuffle_rng_.state()}, {"gumbel", gumbel_rng_.state()}};
  // Output locations are not training state; leaving them out keeps
  // checkpoints of identical runs byte-identical across directories.
  json cfg = config_.to_json();
  cfg.erase("checkpoint_dir");
  cfg.erase("log_path");
  snap.state["config"] = cfg;
  json hist = json::array();
  for (const auto& r : history_) hist.push_back(r.to_json());
  snap.state["history"] = hist;
  put_adam(snap, "pretrain", pre_);
  put_adam(snap, "generator", gen_);
  put_adam(snap, "discriminator", disc_);
  return snap;
}

void Trainer::restore(const TrainSnapshot& snap) {
  try {
    pretrain_done_ = snap.state.at("pretrain_done").get<int>();
    adversarial_done_ = snap.state.at("adversarial_done").get<int>();
    shuffle_rng_.restore(snap.state.at("rng").at("shuffle").get<std::string>());
    gumbel_rng_.restore(snap.state.at("rng").at("gumbel").get<std::string>());
    history_.clear();
    for (const auto& r : snap.state.at("history")) history_.push_back(EpochRecord::from_json(r));
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: malformed training state: ") + e.what());
  }
  get_adam(snap, "pretrain", pre_);
  get_adam(snap, "generator", gen_);
  get_adam(snap, "discriminator", disc_);
}

void Trainer::save(const std::filesystem::path& path) const { save_checkpoint(path, model_, snapshot()); }

}  // namespace songsmith
