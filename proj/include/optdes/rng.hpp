#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace optdes {

// Deterministic random stream. Every stochastic routine takes its own
// substream derived from a master seed and a name, so adding a consumer never
// shifts the draws seen by another. Floating-point conversion is done here
// rather than through <random> distributions, whose output is not specified
// bit-for-bit by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Substream keyed by (seed, name).
  static Rng substream(std::uint64_t seed, std::string_view name);
  // Child stream keyed by an index; used for multistarts and per-draw work.
  Rng split(std::uint64_t index) const;

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lower, double upper) { return lower + (upper - lower) * uniform(); }
  // Uniform integer on [0, n).
  std::size_t below(std::size_t n);
  // Standard normal via Box-Muller.
  double normal();
  std::vector<std::size_t> permutation(std::size_t n);

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_name(std::string_view name);

}  // namespace optdes
