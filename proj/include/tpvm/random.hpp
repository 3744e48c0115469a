#pragma once

#include <cstdint>
#include <random>

namespace tpvm {

// Seed mixer used to derive independent streams (restarts, per-purpose draws).
inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Uniform doubles in [0,1] that are identical across standard libraries:
// mt19937_64 is fully specified, the distribution classes are not.
class UnitRng {
 public:
  explicit UnitRng(std::uint64_t seed) : engine_(seed) {}

  // 53 random bits scaled by 1/(2^53 - 1), so both endpoints are reachable.
  double closed() { return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740991.0); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tpvm
