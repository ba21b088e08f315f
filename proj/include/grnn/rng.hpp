#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace grnn {

// Seeded random source with named sub-streams. Every random decision in the
// project flows from one top-level seed; sub-streams ("init", "folds",
// "synth", ...) are derived from the base seed and a name, so the draw count
// of one component never shifts another component's sequence.
//
// Doubles are produced from the raw 64-bit output instead of
// std::uniform_real_distribution, whose mapping is implementation-defined;
// this keeps sequences bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed)
      : base_seed_(seed), engine_(mix(seed)) {}

  // Independent stream derived from the base seed and a label.
  Rng stream(std::string_view name) const {
    return Rng(mix(base_seed_ ^ fnv1a(name)));
  }

  std::uint64_t next() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  int index(int n) { return static_cast<int>(below(static_cast<std::uint64_t>(n))); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  std::uint64_t base_seed() const { return base_seed_; }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char c : s) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  // splitmix64 finalizer; decorrelates nearby seeds before they reach the engine.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::uint64_t base_seed_;
  std::mt19937_64 engine_;
};

}  // namespace grnn
