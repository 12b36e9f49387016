#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "songsmith/core/midi.hpp"
#include "songsmith/net/generate.hpp"

namespace songsmith {

struct GenerateRequest {
  std::string lyrics;
  StyleControls controls;
  std::optional<std::uint64_t> seed;
  std::string checkpoint;  // empty selects the default checkpoint

  /// Throws ValidationError naming the offending field.
  static GenerateRequest from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct GenerateResponse {
  std::string id;
  GenerateRequest request;  // seed always filled in
  std::string checkpoint_hash;
  LyricsSequence lyrics;
  MelodySequence melody;
  std::array<std::vector<int>, kNumAttributes> tokens;  // 1-based classes
  StyleFeatures realized;
  int oov_count = 0;

  nlohmann::json to_json() const;
  static GenerateResponse from_json(const nlohmann::json& j);
};

/// Note rectangles in quarter notes: onset is the cumulative sum of the
/// previous notes' duration + rest, offset = onset + duration.
nlohmann::json pianoroll_json(const MelodySequence& melody, const LyricsSequence& lyrics,
                              double tempo_bpm = kDefaultTempoBpm);

struct ServiceConfig {
  std::filesystem::path checkpoint_dir;
  std::string default_checkpoint;      // file stem; first in sorted order when empty
  std::filesystem::path cache_dir;     // persisted generations; empty keeps them in memory only
  double tempo_bpm = 120.0;
};

/// Loads checkpoints on demand and serves generations. Thread-safe.
class StudioService {
 public:
  explicit StudioService(ServiceConfig config);

  GenerateResponse generate(const GenerateRequest& request);
  std::optional<GenerateResponse> find(const std::string& id) const;
  std::vector<std::uint8_t> midi(const GenerateResponse& r) const;
  nlohmann::json pianoroll(const GenerateResponse& r) const;
  nlohmann::json list_checkpoints() const;
  /// Drops cached models so the next request reloads from disk.
  void reload();
  const ServiceConfig& config() const { return config_; }

 private:
  std::shared_ptr<const ModelBundle> model(const std::string& id, std::string* hash);
  std::string resolve(const std::string& id) const;

  ServiceConfig config_;
  mutable std::shared_mutex models_mutex_;
  std::map<std::string, std::pair<std::shared_ptr<const ModelBundle>, std::string>> models_;
  mutable std::mutex cache_mutex_;
  std::map<std::string, GenerateResponse> cache_;
};

/// Raised for unusable checkpoints (maps to a 5xx status).
class CheckpointFault : public Error {
 public:
  using Error::Error;
};

}  // namespace songsmith
