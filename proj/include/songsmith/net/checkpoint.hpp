#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "songsmith/core/vocab.hpp"
#include "songsmith/embed/lyrics.hpp"
#include "songsmith/net/params.hpp"
#include "songsmith/style/rse.hpp"

namespace songsmith {

/// Everything needed to generate from lyrics: networks, vocabularies,
/// discretizers and the two lyric embedding tables.
struct ModelBundle {
  GeneratorParams gen;
  DiscriminatorParams disc;
  VocabSet vocab;
  DiscretizerSet discretizers;
  EmbeddingTable words;
  EmbeddingTable syllables;
  TokenizerOptions tokenizer;

  const ModelConfig& config() const { return gen.config; }
};

/// JSON header plus named column-major double tensors.
struct TensorArchive {
  nlohmann::json header = nlohmann::json::object();
  std::vector<std::pair<std::string, Matrix>> tensors;

  const Matrix& tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
};

inline constexpr char kCheckpointMagic[] = "SONGSMITHCK";
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout: magic, u32 version, u64 header length, header JSON, then each
/// tensor's values as little-endian doubles in table order.
std::vector<std::uint8_t> serialize_archive(const TensorArchive& archive);
TensorArchive deserialize_archive(const std::vector<std::uint8_t>& bytes);

/// Optional training state carried alongside the model.
struct TrainSnapshot {
  nlohmann::json state;  // counters, RNG states, histories
  std::vector<std::pair<std::string, Matrix>> tensors;  // optimizer moments
};

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& model,
                     const std::optional<TrainSnapshot>& train = std::nullopt);

struct LoadedCheckpoint {
  ModelBundle model;
  std::optional<TrainSnapshot> train;
  std::string config_hash;
};

/// Throws Error on a bad magic, version, hash mismatch or truncated data.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Header summary without reading tensor data (for checkpoint listings).
nlohmann::json checkpoint_summary(const std::filesystem::path& path);

}  // namespace songsmith
