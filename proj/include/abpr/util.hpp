#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace abpr {

std::uint64_t fnv1a64(const std::string& s);
std::string digest_hex(const std::string& s);

/// Deterministic cross-platform PRNG (splitmix64).
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform in [0, n).
  std::uint64_t below(std::uint64_t n);

private:
  std::uint64_t state_;
};

/// Fisher-Yates permutation of 0..n-1 driven by the seed.
std::vector<size_t> seeded_permutation(size_t n, std::uint64_t seed);

}  // namespace abpr
