#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace songsmith {

/// Seeded 64-bit Mersenne Twister with distribution code written out here,
/// so draws are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  /// Independent stream derived from a base seed and a purpose tag.
  static Rng stream(std::uint64_t seed, std::string_view purpose);

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  /// Uniform in the open interval (0, 1).
  double uniform_open();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();
  /// Standard Gumbel(0, 1) draw.
  double gumbel();

  std::string state() const;
  void restore(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace songsmith
