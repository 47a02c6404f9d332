#pragma once

#include <cstddef>
#include <filesystem>
#include <random>
#include <string>

#include "evloc/embedding.hpp"

namespace testing {

inline evloc::EmbeddingMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  evloc::EmbeddingMatrix m(rows, dim);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

// Fresh scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::path(EVLOC_TEST_TMP) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
