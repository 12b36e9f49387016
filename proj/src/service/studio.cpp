#include "songsmith/service/studio.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "songsmith/embed/lyrics.hpp"

namespace songsmith {

using nlohmann::json;

GenerateRequest GenerateRequest::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("body", "request body must be a JSON object");
  GenerateRequest r;
  if (!j.contains("lyrics") || !j["lyrics"].is_string()) {
    throw ValidationError("lyrics", "lyrics must be a string");
  }
  r.lyrics = j["lyrics"].get<std::string>();
  if (j.contains("controls")) {
    const json& c = j["controls"];
    if (!c.is_object()) throw ValidationError("controls", "controls must be an object");
    for (const auto& [name, value] : c.items()) {
      std::pair<Attribute, StyleFeature> slot;
      try {
        slot = parse_control_name(name);
      } catch (const Error&) {
        throw ValidationError(name, "unknown control '" + name + "'");
      }
      if (!value.is_number()) throw ValidationError(name, name + " must be a number");
      r.controls.set(slot.first, slot.second, value.get<double>());
    }
  }
  r.controls.validate();
  if (j.contains("seed") && !j["seed"].is_null()) {
    const json& seed = j["seed"];
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      throw ValidationError("seed", "seed must be a non-negative integer");
    }
    r.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("checkpoint") && !j["checkpoint"].is_null()) {
    if (!j["checkpoint"].is_string()) throw ValidationError("checkpoint", "checkpoint must be a string");
    r.checkpoint = j["checkpoint"].get<std::string>();
  }
  return r;
}

json GenerateRequest::to_json() const {
  json controls = json::object();
  for (Attribute a : kAllAttributes) {
    for (StyleFeature f : {StyleFeature::kRange, StyleFeature::kAverage, StyleFeature::kVariance}) {
      controls[control_name(a, f)] = this->controls.get(a, f);
    }
  }
  json j = {{"lyrics", lyrics}, {"controls", controls}, {"checkpoint", checkpoint}};
  j["seed"] = seed ? json(*seed) : json(nullptr);
  return j;
}

namespace {

json features_json(const StyleFeatures& f) {
  json j = json::object();
  for (Attribute a : kAllAttributes) {
    for (StyleFeature s : {StyleFeature::kRange, StyleFeature::kAverage, StyleFeature::kVariance}) {
      j[control_name(a, s)] = f.get(a, s);
    }
  }
  return j;
}

json notes_json(const MelodySequence& m) {
  json notes = json::array();
  for (const auto& n : m.notes) notes.push_back({n.pitch, n.duration, n.rest});
  return notes;
}

}  // namespace

json GenerateResponse::to_json() const {
  json tok = json::object();
  for (Attribute a : kAllAttributes) tok[std::string(attribute_name(a))] = tokens[index_of(a)];
  json words = json::array();
  for (const auto& [a, b] : lyrics.word_spans) words.push_back({a, b});
  return {{"id", id},
          {"request", request.to_json()},
          {"checkpoint_hash", checkpoint_hash},
          {"syllables", lyrics.syllables},
          {"word_spans", words},
          {"notes", notes_json(melody)},
          {"tokens", tok},
          {"realized", melody.size() >= 2 ? features_json(realized) : json(nullptr)},
          {"oov_count", oov_count}};
}

GenerateResponse GenerateResponse::from_json(const json& j) {
  GenerateResponse r;
  r.id = j.at("id").get<std::string>();
  r.request = GenerateRequest::from_json(j.at("request"));
  r.checkpoint_hash = j.at("checkpoint_hash").get<std::string>();
  r.lyrics.syllables = j.at("syllables").get<std::vector<std::string>>();
  for (const auto& w : j.at("word_spans")) r.lyrics.word_spans.emplace_back(w[0].get<std::size_t>(), w[1].get<std::size_t>());
  for (const auto& n : j.at("notes")) r.melody.notes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<double>()});
  for (Attribute a : kAllAttributes) {
    r.tokens[index_of(a)] = j.at("tokens").at(std::string(attribute_name(a))).get<std::vector<int>>();
  }
  if (r.melody.size() >= 2) r.realized = extract_style_features(r.melody);
  r.oov_count = j.value("oov_count", 0);
  return r;
}

json pianoroll_json(const MelodySequence& melody, const LyricsSequence& lyrics, double tempo_bpm) {
  json notes = json::array();
  double onset = 0.0;
  for (std::size_t i = 0; i < melody.size(); ++i) {
    const auto& n = melody.notes[i];
    notes.push_back({{"index", i},
                     {"onset", onset},
                     {"offset", onset + n.duration},
                     {"pitch", n.pitch},
                     {"duration", n.duration},
                     {"rest", n.rest},
                     {"syllable", i < lyrics.syllables.size() ? lyrics.syllables[i] : ""}});
    onset += n.duration + n.rest;
  }
  int lo = 127, hi = 0;
  for (const auto& n : melody.notes) {
    lo = std::min(lo, n.pitch);
    hi = std::max(hi, n.pitch);
  }
  return {{"time_unit", "quarter_note"},
          {"tempo_bpm", tempo_bpm},
          {"total_length", onset},
          {"pitch_min", melody.empty() ? 0 : lo},
          {"pitch_max", melody.empty() ? 0 : hi},
          {"notes", notes}};
}

StudioService::StudioService(ServiceConfig config) : config_(std::move(config)) {
  if (!config_.cache_dir.empty()) std::filesystem::create_directories(config_.cache_dir);
}

std::string StudioService::resolve(const std::string& id) const {
  const std::string wanted = id.empty() ? config_.default_checkpoint : id;
  if (!wanted.empty()) {
    if (wanted.find('/') != std::string::npos || wanted.find("..") != std::string::npos) {
      throw ValidationError("checkpoint", "invalid checkpoint id '" + wanted + "'");
    }
    if (!std::filesystem::exists(config_.checkpoint_dir / (wanted + ".ckpt"))) {
      throw ValidationError("checkpoint", "unknown checkpoint '" + wanted + "'");
    }
    return wanted;
  }
  const auto listing = list_checkpoints();
  if (listing.empty()) throw CheckpointFault("no checkpoints available in " + config_.checkpoint_dir.string());
  return listing.front().at("id").get<std::string>();
}

std::shared_ptr<const ModelBundle> StudioService::model(const std::string& id, std::string* hash) {
  {
    std::shared_lock lock(models_mutex_);
    const auto it = models_.find(id);
    if (it != models_.end()) {
      *hash = it->second.second;
      return it->second.first;
    }
  }
  std::unique_lock lock(models_mutex_);
  const auto it = models_.find(id);
  if (it != models_.end()) {
    *hash = it->second.second;
    return it->second.first;
  }
  try {
    LoadedCheckpoint lc = load_checkpoint(config_.checkpoint_dir / (id + ".ckpt"));
    auto bundle = std::make_shared<const ModelBundle>(std::move(lc.model));
    const std::string file_hash = [&] {
      std::ostringstream os;
      std::ifstream in(config_.checkpoint_dir / (id + ".ckpt"), std::ios::binary);
      const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(bytes);
      return os.str();
    }();
    models_[id] = {bundle, file_hash};
    *hash = file_hash;
    return bundle;
  } catch (const Error& e) {
    throw CheckpointFault(e.what());
  }
}

GenerateResponse StudioService::generate(const GenerateRequest& request) {
  request.controls.validate();
  GenerateRequest req = request;
  if (!req.seed) {
    std::random_device rd;
    req.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  req.checkpoint = resolve(req.checkpoint);
  std::string hash;
  const auto bundle = model(req.checkpoint, &hash);

  LyricsSequence lyrics = tokenize_lyrics(req.lyrics, bundle->tokenizer);
  if (lyrics.size() == 0) throw ValidationError("lyrics", "lyrics must contain at least one syllable");

  GenerationItem item{lyrics, control_to_rse(req.controls, bundle->discretizers), *req.seed};
  const auto out = songsmith::generate(*bundle, std::span<const GenerationItem>(&item, 1)).front();

  GenerateResponse resp;
  resp.request = req;
  resp.checkpoint_hash = hash;
  resp.lyrics = std::move(lyrics);
  resp.melody = out.melody;
  resp.tokens = out.classes;
  resp.oov_count = out.oov_count;
  if (resp.melody.size() >= 2) resp.realized = extract_style_features(resp.melody);
  std::ostringstream id;
  id << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(hash + "\n" + req.to_json().dump());
  resp.id = id.str();

  std::lock_guard lock(cache_mutex_);
  cache_[resp.id] = resp;
  if (!config_.cache_dir.empty()) {
    std::ofstream f(config_.cache_dir / (resp.id + ".json"), std::ios::trunc);
    f << resp.to_json().dump() << "\n";
  }
  return resp;
}

std::optional<GenerateResponse> StudioService::find(const std::string& id) const {
  std::lock_guard lock(cache_mutex_);
  const auto it = cache_.find(id);
  if (it != cache_.end()) return it->second;
  if (config_.cache_dir.empty() || id.find_first_not_of("0123456789abcdef") != std::string::npos) {
    return std::nullopt;
  }
  std::ifstream f(config_.cache_dir / (id + ".json"));
  if (!f) return std::nullopt;
  try {
    return GenerateResponse::from_json(json::parse(f));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::vector<std::uint8_t> StudioService::midi(const GenerateResponse& r) const {
  return melody_to_midi(r.melody, config_.tempo_bpm, r.lyrics.syllables);
}

json StudioService::pianoroll(const GenerateResponse& r) const {
  json j = pianoroll_json(r.melody, r.lyrics, config_.tempo_bpm);
  j["id"] = r.id;
  return j;
}

json StudioService::list_checkpoints() const {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(config_.checkpoint_dir)) {
    for (const auto& e : std::filesystem::directory_iterator(config_.checkpoint_dir)) {
      if (e.is_regular_file() && e.path().extension() == ".ckpt") files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  json out = json::array();
  for (const auto& f : files) {
    json entry = {{"id", f.stem().string()}};
    try {
      entry.update(checkpoint_summary(f));
      entry["ok"] = true;
    } catch (const Error& e) {
      entry["ok"] = false;
      entry["error"] = e.what();
    }
    out.push_back(entry);
  }
  return out;
}

void StudioService::reload() {
  std::unique_lock lock(models_mutex_);
  models_.clear();
}

}  // namespace songsmith
