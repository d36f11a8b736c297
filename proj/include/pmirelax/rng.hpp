#pragma once

#include <cstdint>

namespace pmirelax {

// Counter-based generator: the k-th draw for a given seed is a pure function
// of (seed, k), so streams can be split and replayed without shared state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1))), counter_(0) {}

  std::uint64_t next_u64() { return at(counter_++); }

  // Value of draw k, independent of the cursor.
  std::uint64_t at(std::uint64_t k) const {
    std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1) with 53 random bits.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on [lo,hi).
  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_;
};

// FNV-1a; used for content hashes recorded in certificates and run logs.
inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pmirelax
