#include "songsmith/train/pipeline.hpp"

#include <fstream>

namespace songsmith {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const json& j, const char* key, const fs::path& base) {
  if (!j.contains(key) || j[key].is_null()) return {};
  fs::path p = j[key].get<std::string>();
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

std::vector<PairedSample> load_corpus(const fs::path& path, CorpusFormat format) {
  if (path.empty()) return {};
  if (!fs::exists(path)) throw Error("corpus not found: " + path.string());
  return ingest_corpus(path, format).samples;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j, const fs::path& base) {
  RunConfig c;
  try {
    const json corpus = j.value("corpus", json::object());
    c.train_corpus = resolve(corpus, "train", base);
    c.valid_corpus = resolve(corpus, "valid", base);
    c.vocab_corpus = resolve(corpus, "vocab", base);
    c.format = parse_corpus_format(corpus.value("format", std::string("records")));
    const json emb = j.value("embeddings", json::object());
    c.word_embeddings = resolve(emb, "words", base);
    c.syllable_embeddings = resolve(emb, "syllables", base);
    if (j.contains("model")) c.model = ModelConfig::from_json(j["model"]);
    if (j.contains("train")) c.train = TrainConfig::from_json(j["train"]);
    if (j.contains("tokenizer")) {
      c.tokenizer.lowercase = j["tokenizer"].value("lowercase", true);
      c.tokenizer.strip_punctuation = j["tokenizer"].value("strip_punctuation", true);
    }
    c.init_seed = j.value("init_seed", c.init_seed);
    if (j.contains("output_dir")) c.output_dir = resolve(j, "output_dir", base);
    c.resume = resolve(j, "resume", base);
  } catch (const json::exception& e) {
    throw ValidationError("config", std::string("malformed run config: ") + e.what());
  }
  if (c.train_corpus.empty()) throw ValidationError("corpus.train", "corpus.train is required");
  if (c.word_embeddings.empty() || c.syllable_embeddings.empty()) {
    throw ValidationError("embeddings", "embeddings.words and embeddings.syllables are required");
  }
  return c;
}

json RunConfig::to_json() const {
  return {{"corpus",
           {{"train", train_corpus.string()},
            {"valid", valid_corpus.string()},
            {"vocab", vocab_corpus.string()},
            {"format", format == CorpusFormat::kRecords ? "records" : "paired"}}},
          {"embeddings", {{"words", word_embeddings.string()}, {"syllables", syllable_embeddings.string()}}},
          {"model", model.to_json()},
          {"train", train.to_json()},
          {"tokenizer", {{"lowercase", tokenizer.lowercase}, {"strip_punctuation", tokenizer.strip_punctuation}}},
          {"init_seed", init_seed},
          {"output_dir", output_dir.string()},
          {"resume", resume.string()}};
}

RunResult run_training(const RunConfig& config, const std::function<void(const EpochRecord&)>& on_epoch) {
  const auto train = load_corpus(config.train_corpus, config.format);
  if (train.empty()) throw Error("corpus not found or empty: " + config.train_corpus.string());
  const auto valid = load_corpus(config.valid_corpus, config.format);
  auto vocab_corpus = load_corpus(config.vocab_corpus, config.format);
  vocab_corpus.insert(vocab_corpus.end(), valid.begin(), valid.end());

  ModelBundle model;
  std::optional<TrainSnapshot> resume_state;
  if (!config.resume.empty()) {
    LoadedCheckpoint lc = load_checkpoint(config.resume);
    model = std::move(lc.model);
    resume_state = std::move(lc.train);
  } else {
    ModelSetup setup{config.model, config.rules, config.tokenizer, config.init_seed};
    model = build_model(train, vocab_corpus, EmbeddingTable::load(config.word_embeddings),
                        EmbeddingTable::load(config.syllable_embeddings), setup);
  }

  TrainConfig tc = config.train;
  if (tc.checkpoint_dir.empty()) tc.checkpoint_dir = config.output_dir / "checkpoints";
  if (tc.log_path.empty()) tc.log_path = config.output_dir / "train_log.jsonl";
  fs::create_directories(config.output_dir);
  if (!resume_state && fs::exists(tc.log_path)) fs::remove(tc.log_path);
  {
    std::ofstream cfg(config.output_dir / "run_config.json");
    json j = config.to_json();
    j["train"] = tc.to_json();
    cfg << j.dump(2) << "\n";
  }

  std::vector<MelodySequence> valid_melodies;
  for (const auto& s : valid) valid_melodies.push_back(s.melody);
  Trainer trainer(model, tc, encode_samples(train, model), encode_samples(valid, model), valid_melodies);
  if (resume_state) trainer.restore(*resume_state);
  trainer.train(on_epoch);
  return {tc.checkpoint_dir / "final.ckpt", trainer.history(), train.size(), valid.size()};
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ValidationError("set", "override must look like key.path=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::exception&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError("set", "empty path component in '" + key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    if (!(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

}  // namespace songsmith
