#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace shg {

// Bounded draw with a fixed mapping so shuffles and resamples reproduce
// bit-exactly across standard libraries (uniform_int_distribution does not).
inline std::size_t bounded_draw(std::mt19937_64& gen, std::size_t n) {
  return static_cast<std::size_t>((static_cast<unsigned __int128>(gen()) * n) >> 64);
}

template <typename T>
void seeded_shuffle(std::vector<T>& v, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[bounded_draw(gen, i)]);
}

}  // namespace shg
