#pragma once

// Named, portable random streams. Every stream is derived from a root seed
// and a name of the form "module:operation" plus an index, so results do not
// depend on thread schedules or standard library distribution internals.

#include <cstdint>
#include <random>
#include <string_view>

#include "logcascade/fixed.hpp"

namespace logcascade {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view name,
                                 std::uint64_t index) noexcept {
  return splitmix64(splitmix64(root ^ fnv1a(name)) + splitmix64(index + 0x632be59bd9b4e019ULL));
}

class Stream {
 public:
  Stream(std::uint64_t root, std::string_view name, std::uint64_t index = 0)
      : engine_(derive_seed(root, name, index)) {}

  std::uint64_t bits() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); rejection sampling, n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (UINT64_MAX / n);
    std::uint64_t v = 0;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Uniform 256-bit circle point.
  Fixed circle_point() {
    Limbs l{};
    for (auto& limb : l) limb = engine_();
    return Fixed(l);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace logcascade
