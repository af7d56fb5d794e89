#include "rflabel/rng.hpp"

namespace rflabel {

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<SeedPart> parts) {
  std::uint64_t h = mix64(master);
  for (const SeedPart& part : parts) {
    const std::uint64_t v = std::holds_alternative<std::uint64_t>(part)
                                ? mix64(std::get<std::uint64_t>(part) + 0x9E3779B97F4A7C15ULL)
                                : hash_string(std::get<std::string_view>(part));
    h = mix64(h ^ (v + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
  }
  return h;
}

Rng Rng::split(std::initializer_list<SeedPart> parts) const {
  return Rng(derive_seed(key_, parts));
}

}  // namespace rflabel
