#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmix/mixture.hpp"
#include "mcmix/trail_distribution.hpp"

namespace mcmix {

struct EmConfig {
  int max_iters = 100;
  double tol = 1e-8;              // stop when the relative log-likelihood gain drops below this
  std::optional<Mixture> warm;    // random init from seed when empty
  std::uint64_t seed = 0;
  double smoothing = -1.0;        // negative: 0 for exact input, 1e-9 for empirical
};

struct EmResult {
  Mixture mixture;
  int iterations = 0;
  std::vector<double> loglik_trace;  // initial value first, one entry per iteration after
  std::vector<std::string> warnings;
};

EmResult em_fit(const TrailDistribution& dist, int L, const EmConfig& cfg = {});

// Warm-started EM for a fixed number of iterations; iters = 0 returns seed.
Mixture refine(const TrailDistribution& dist, const Mixture& seed, int iters = 5);

}  // namespace mcmix
