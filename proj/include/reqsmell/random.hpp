#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace reqsmell {

using Engine = std::mt19937_64;

/// Fixed component indices for deriving independent sub-streams from one
/// root seed. Values are part of the reproducibility contract; never reorder.
enum class Stream : std::uint32_t {
  folds = 1,
  smote = 2,
  mlp = 3,
  svm = 4,
  curve_split = 5,
  mlp_shuffle = 6,
};

/// Engine seeded from (root, component, indices...). Both std::seed_seq and
/// mt19937_64 are fully specified by the standard, so streams are portable.
inline Engine make_engine(std::uint64_t root, Stream component,
                          std::initializer_list<std::uint64_t> indices = {}) {
  std::vector<std::uint32_t> words;
  words.push_back(static_cast<std::uint32_t>(root));
  words.push_back(static_cast<std::uint32_t>(root >> 32));
  words.push_back(static_cast<std::uint32_t>(component));
  for (auto i : indices) {
    words.push_back(static_cast<std::uint32_t>(i));
    words.push_back(static_cast<std::uint32_t>(i >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  return Engine(seq);
}

/// Uniform double in [0, 1) using the top 53 bits.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n), unbiased by rejection. Requires n > 0.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

/// Fisher-Yates shuffle driven by uniform_index, so the permutation does not
/// depend on the standard library's distribution implementations.
template <class T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = uniform_index(eng, i);
    std::swap(v[i - 1], v[j]);
  }
}

} // namespace reqsmell
