#pragma once
// Counter-based random stream and stable seed derivation.
//
// Every random draw in the toolkit comes from an Rng whose key is derived from
// the run's master seed and the identity of the entity being simulated
// (target, transmitter, burst index, label index, ...). Output depends only on
// (key, draw index), so parallel scheduling never changes results.

#include <cstdint>
#include <initializer_list>
#include <limits>
#include <string_view>
#include <variant>

namespace rflabel {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a over the bytes of a string.
constexpr std::uint64_t hash_string(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

using SeedPart = std::variant<std::uint64_t, std::string_view>;

/// Stable hash of (master, parts...). Independent of platform and call order.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<SeedPart> parts);

/// Satisfies UniformRandomBitGenerator; usable with boost::random distributions.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) : key_(mix64(key ^ 0x6A09E667F3BCC909ULL)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Independent child stream; does not advance this stream.
  Rng split(std::initializer_list<SeedPart> parts) const;

  std::uint64_t key() const { return key_; }
  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace rflabel
