#pragma once

#include <cstdint>
#include <random>

#include "mcmix/mixture.hpp"

namespace mcmix {

struct GeneratorSpec {
  int n = 0;
  int L = 0;
  int r = 0;
  std::uint64_t seed = 0;
  bool ensure_recoverable = true;
  int min_component_size = 2;
};

// Random block-structured mixture with exactly r components overall. The
// r - L splits go to uniformly chosen chains; a chain with k splits cuts its
// states into k + 1 random parts and keeps only within-part transitions.
// Throws Error(GenerationFailed) once the retry budget is spent.
Mixture generate_mixture(const GeneratorSpec& spec);

// Rows of normalized independent uniforms.
Matrix random_stochastic(int rows, int cols, std::mt19937_64& rng);

// Dense mixture: random stochastic rows and a random start over all L * n entries.
Mixture random_mixture(int n, int L, std::mt19937_64& rng);

}  // namespace mcmix
