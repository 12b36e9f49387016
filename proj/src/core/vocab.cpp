#include "songsmith/core/vocab.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace songsmith {
namespace {

constexpr double kValueTolerance = 1e-6;
constexpr const char* kVocabFormat = "songsmith.vocab";
constexpr int kVocabVersion = 1;

}  // namespace

AttributeVocab::AttributeVocab(Attribute attribute, std::vector<double> values)
    : attribute_(attribute), values_(std::move(values)) {
  if (values_.empty()) throw Error("empty vocabulary for " + std::string(attribute_name(attribute)));
  if (!std::is_sorted(values_.begin(), values_.end())) {
    throw Error("vocabulary values must be sorted");
  }
  for (std::size_t i = 1; i < values_.size(); ++i) {
    if (values_[i] - values_[i - 1] < kValueTolerance) throw Error("duplicate vocabulary value");
  }
}

AttributeVocab AttributeVocab::contiguous(Attribute attribute, int lo, int hi) {
  if (hi < lo) throw Error("empty pitch range");
  std::vector<double> v;
  for (int p = lo; p <= hi; ++p) v.push_back(p);
  return {attribute, std::move(v)};
}

std::optional<int> AttributeVocab::find(double value) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), value - kValueTolerance);
  if (it == values_.end() || std::abs(*it - value) > kValueTolerance) return std::nullopt;
  return static_cast<int>(it - values_.begin()) + 1;
}

int AttributeVocab::index_of(double value) const {
  if (auto k = find(value)) return *k;
  throw Error("vocabulary overflow: " + std::string(attribute_name(attribute_)) + " value " +
              std::to_string(value) + " is not representable");
}

double AttributeVocab::value_at(int index) const {
  if (index < 1 || index > static_cast<int>(values_.size())) {
    throw Error("class index " + std::to_string(index) + " out of range for " +
                std::string(attribute_name(attribute_)));
  }
  return values_[static_cast<std::size_t>(index - 1)];
}

int AttributeVocab::nearest_index(double value) const {
  int best = 1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double d = std::abs(values_[i] - value);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i) + 1;
    }
  }
  return best;
}

std::array<int, kNumAttributes> VocabSet::sizes() const {
  return {static_cast<int>(vocabs[0].size()), static_cast<int>(vocabs[1].size()),
          static_cast<int>(vocabs[2].size())};
}

std::array<std::vector<int>, kNumAttributes> VocabSet::encode(const MelodySequence& m) const {
  std::array<std::vector<int>, kNumAttributes> out;
  for (Attribute a : kAllAttributes) {
    auto& dst = out[index_of(a)];
    dst.reserve(m.size());
    for (const auto& n : m.notes) dst.push_back((*this)[a].index_of(n.value(a)));
  }
  return out;
}

MelodySequence VocabSet::decode(std::span<const int> pitch, std::span<const int> duration,
                                std::span<const int> rest) const {
  if (pitch.size() != duration.size() || pitch.size() != rest.size()) {
    throw Error("attribute token sequences differ in length");
  }
  MelodySequence m;
  m.notes.reserve(pitch.size());
  for (std::size_t t = 0; t < pitch.size(); ++t) {
    m.notes.push_back({static_cast<int>(std::lround((*this)[Attribute::kPitch].value_at(pitch[t]))),
                       (*this)[Attribute::kDuration].value_at(duration[t]),
                       (*this)[Attribute::kRest].value_at(rest[t])});
  }
  return m;
}

bool VocabSet::representable(const MelodySequence& m) const {
  for (const auto& n : m.notes) {
    for (Attribute a : kAllAttributes) {
      if (!(*this)[a].find(n.value(a))) return false;
    }
  }
  return true;
}

nlohmann::json VocabSet::to_json() const {
  nlohmann::json j;
  j["format"] = kVocabFormat;
  j["version"] = kVocabVersion;
  const auto& pitch = (*this)[Attribute::kPitch].values();
  j["pitch"] = {{"min", static_cast<int>(pitch.front())}, {"max", static_cast<int>(pitch.back())}};
  j["duration"] = (*this)[Attribute::kDuration].values();
  j["rest"] = (*this)[Attribute::kRest].values();
  return j;
}

VocabSet VocabSet::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kVocabFormat) throw Error("not a vocabulary manifest");
  if (j.value("version", 0) != kVocabVersion) {
    throw Error("unsupported vocabulary manifest version " + std::to_string(j.value("version", 0)));
  }
  VocabSet v;
  v.vocabs[0] = AttributeVocab::contiguous(Attribute::kPitch, j.at("pitch").at("min").get<int>(),
                                           j.at("pitch").at("max").get<int>());
  v.vocabs[1] = AttributeVocab(Attribute::kDuration, j.at("duration").get<std::vector<double>>());
  v.vocabs[2] = AttributeVocab(Attribute::kRest, j.at("rest").get<std::vector<double>>());
  return v;
}

void VocabSet::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump(2) << '\n';
}

VocabSet VocabSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  return from_json(nlohmann::json::parse(in));
}

namespace {

std::vector<double> distinct_sorted(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  std::vector<double> out;
  for (double v : values) {
    if (out.empty() || v - out.back() > kValueTolerance) out.push_back(v);
  }
  return out;
}

}  // namespace

VocabSet build_vocab(std::span<const MelodySequence> melodies) {
  int lo = std::numeric_limits<int>::max();
  int hi = std::numeric_limits<int>::min();
  std::vector<double> durations, rests;
  for (const auto& m : melodies) {
    for (const auto& n : m.notes) {
      lo = std::min(lo, n.pitch);
      hi = std::max(hi, n.pitch);
      durations.push_back(n.duration);
      rests.push_back(n.rest);
    }
  }
  if (durations.empty()) throw Error("cannot build a vocabulary from an empty corpus");
  VocabSet v;
  v.vocabs[0] = AttributeVocab::contiguous(Attribute::kPitch, lo, hi);
  v.vocabs[1] = AttributeVocab(Attribute::kDuration, distinct_sorted(std::move(durations)));
  v.vocabs[2] = AttributeVocab(Attribute::kRest, distinct_sorted(std::move(rests)));
  return v;
}

}  // namespace songsmith
