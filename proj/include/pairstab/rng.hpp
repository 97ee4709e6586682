#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pairstab {

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Named-stream seed splitting: each consumer (dataset, trajectory, probe, ...)
// gets its own stream so adding a consumer never shifts the others.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index);

// Seeded generator with distribution code written out here rather than taken
// from <random>, whose distributions are implementation-defined. Output is
// identical across standard libraries for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  // Standard normal, Marsaglia polar method.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pairstab
