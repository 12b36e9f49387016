#include "songsmith/net/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace songsmith {

using nlohmann::json;

const Matrix& TensorArchive::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors) {
    if (n == name) return m;
  }
  throw Error("checkpoint: missing tensor " + name);
}

bool TensorArchive::has_tensor(const std::string& name) const {
  for (const auto& t : tensors) {
    if (t.first == name) return true;
  }
  return false;
}

namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr std::size_t kMagicLen = sizeof(kCheckpointMagic) - 1;

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + sizeof(T));
}

template <typename T>
T get(const std::vector<std::uint8_t>& in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error("checkpoint: truncated file");
  T v;
  std::memcpy(&v, in.data() + pos, sizeof(T));
  pos += sizeof(T);
  return v;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json header_of(const std::vector<std::uint8_t>& bytes, std::size_t& pos) {
  if (bytes.size() < kMagicLen || std::memcmp(bytes.data(), kCheckpointMagic, kMagicLen) != 0) {
    throw Error("checkpoint: bad magic");
  }
  pos = kMagicLen;
  const auto version = get<std::uint32_t>(bytes, pos);
  if (version != kCheckpointVersion) {
    throw Error("checkpoint: unsupported version " + std::to_string(version));
  }
  const auto len = get<std::uint64_t>(bytes, pos);
  if (pos + len > bytes.size()) throw Error("checkpoint: truncated header");
  json header;
  try {
    header = json::parse(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                         bytes.begin() + static_cast<std::ptrdiff_t>(pos + len));
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: corrupt header: ") + e.what());
  }
  pos += len;
  return header;
}

void add_params(TensorArchive& ar, const ParamSet& params) {
  for (const auto& p : params.all()) ar.tensors.emplace_back(p.name, p.value);
}

void load_params(const TensorArchive& ar, ParamSet& params) {
  for (auto& p : params.all()) {
    const Matrix& m = ar.tensor(p.name);
    if (m.rows() != p.value.rows() || m.cols() != p.value.cols()) {
      throw Error("checkpoint: shape mismatch for " + p.name);
    }
    p.value = m;
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_archive(const TensorArchive& archive) {
  json header = archive.header;
  json table = json::array();
  for (const auto& [name, m] : archive.tensors) table.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}});
  header["tensors"] = table;
  const std::string text = header.dump();
  std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + kMagicLen);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& t : archive.tensors) {
    const Matrix& m = t.second;
    const auto* p = reinterpret_cast<const std::uint8_t*>(m.data());
    out.insert(out.end(), p, p + m.size() * static_cast<Eigen::Index>(sizeof(double)));
  }
  return out;
}

TensorArchive deserialize_archive(const std::vector<std::uint8_t>& bytes) {
  std::size_t pos = 0;
  TensorArchive ar;
  ar.header = header_of(bytes, pos);
  if (!ar.header.contains("tensors") || !ar.header["tensors"].is_array()) {
    throw Error("checkpoint: missing tensor table");
  }
  for (const auto& t : ar.header["tensors"]) {
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    if (rows < 0 || cols < 0) throw Error("checkpoint: negative tensor shape");
    Matrix m(rows, cols);
    const std::size_t n = static_cast<std::size_t>(rows * cols) * sizeof(double);
    if (pos + n > bytes.size()) throw Error("checkpoint: truncated tensor data");
    if (n > 0) std::memcpy(m.data(), bytes.data() + pos, n);
    pos += n;
    ar.tensors.emplace_back(t.at("name").get<std::string>(), std::move(m));
  }
  if (pos != bytes.size()) throw Error("checkpoint: trailing bytes");
  ar.header.erase("tensors");
  return ar;
}

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& model,
                     const std::optional<TrainSnapshot>& train) {
  TensorArchive ar;
  ar.header["format"] = "songsmith.checkpoint";
  ar.header["config"] = model.gen.config.to_json();
  ar.header["config_hash"] = model.gen.config.hash();
  ar.header["vocab"] = model.vocab.to_json();
  ar.header["discretizers"] = model.discretizers.to_json();
  ar.header["word_tokens"] = model.words.tokens();
  ar.header["syllable_tokens"] = model.syllables.tokens();
  ar.header["tokenizer"] = {{"lowercase", model.tokenizer.lowercase},
                            {"strip_punctuation", model.tokenizer.strip_punctuation}};
  add_params(ar, model.gen.params);
  add_params(ar, model.disc.params);
  ar.tensors.emplace_back("embedding.word", model.words.vectors());
  ar.tensors.emplace_back("embedding.syllable", model.syllables.vectors());
  if (train) {
    ar.header["train_state"] = train->state;
    for (const auto& [name, m] : train->tensors) ar.tensors.emplace_back("train." + name, m);
  }
  const auto bytes = serialize_archive(ar);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("checkpoint: cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("checkpoint: write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  const TensorArchive ar = deserialize_archive(read_file(path));
  try {
    const ModelConfig config = ModelConfig::from_json(ar.header.at("config"));
    const std::string hash = ar.header.at("config_hash").get<std::string>();
    if (hash != config.hash()) throw Error("checkpoint: config hash mismatch");
    LoadedCheckpoint lc{{init_generator(config, 0), init_discriminator(config, 0),
                         VocabSet::from_json(ar.header.at("vocab")),
                         DiscretizerSet::from_json(ar.header.at("discretizers")),
                         EmbeddingTable(ar.header.at("word_tokens").get<std::vector<std::string>>(),
                                        ar.tensor("embedding.word")),
                         EmbeddingTable(ar.header.at("syllable_tokens").get<std::vector<std::string>>(),
                                        ar.tensor("embedding.syllable")),
                         {}},
                        std::nullopt,
                        hash};
    const json& tok = ar.header.at("tokenizer");
    lc.model.tokenizer.lowercase = tok.at("lowercase").get<bool>();
    lc.model.tokenizer.strip_punctuation = tok.at("strip_punctuation").get<bool>();
    load_params(ar, lc.model.gen.params);
    load_params(ar, lc.model.disc.params);
    if (ar.header.contains("train_state")) {
      TrainSnapshot snap{ar.header["train_state"], {}};
      for (const auto& [name, m] : ar.tensors) {
        if (name.rfind("train.", 0) == 0) snap.tensors.emplace_back(name.substr(6), m);
      }
      lc.train = std::move(snap);
    }
    return lc;
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: malformed header: ") + e.what());
  }
}

nlohmann::json checkpoint_summary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path.string());
  std::vector<std::uint8_t> head(kMagicLen + 12);
  in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
  if (!in) throw Error("checkpoint: truncated file");
  std::size_t pos = kMagicLen + 4;
  const auto len = get<std::uint64_t>(head, pos);
  head.resize(head.size() + len);
  in.read(reinterpret_cast<char*>(head.data() + kMagicLen + 12), static_cast<std::streamsize>(len));
  if (!in) throw Error("checkpoint: truncated header");
  std::size_t p2 = 0;
  const json h = header_of(head, p2);
  json out = {{"config_hash", h.value("config_hash", "")}, {"config", h.value("config", json::object())}};
  if (h.contains("train_state")) {
    out["epoch"] = h["train_state"].value("epoch", 0);
    out["phase"] = h["train_state"].value("phase", "");
  }
  return out;
}

}  // namespace songsmith
