#pragma once

#include <cstdint>
#include <random>

namespace bigen {

// Deterministic random stream.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Uniform reals and bounded integers are derived from raw engine
// output with the formulas below instead of std::uniform_*_distribution,
// whose algorithms are implementation-defined. Together with the documented
// draw order in the generator this makes runs reproducible across compilers
// and standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) built from the top 53 bits of one engine word.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // True with probability `p` (consumes exactly one engine word).
  bool chance(double p) { return uniform01() < p; }

  // Uniform integer in [0, n) by rejection on the low residues. n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  std::uint64_t raw() { return engine_(); }

  bool operator==(const Rng&) const = default;

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for (master, a, b): mix64(mix64(mix64(master) ^ a) ^ b).
// Used for sweep cells (a = cell index, b = seed index) and per-snapshot
// sampling streams.
constexpr std::uint64_t deriveSeed(std::uint64_t master, std::uint64_t a,
                                   std::uint64_t b) {
  return mix64(mix64(mix64(master) ^ a) ^ b);
}

}  // namespace bigen
