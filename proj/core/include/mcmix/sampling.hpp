#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "mcmix/mixture.hpp"
#include "mcmix/trail_distribution.hpp"

namespace mcmix {

// Multiset of sampled trails (0-indexed states) with their multiplicities.
using TrailMultiset = std::map<std::vector<int>, std::uint64_t>;

// Draws count trails of the given length. A chain l and start state i are
// picked with probability s^l_i, then length - 1 transitions follow M^l.
// The result depends only on (mixture, count, seed, length), never on the
// number of worker threads.
TrailMultiset sample_trails(const Mixture& mixture, std::uint64_t count, std::uint64_t seed,
                            int length = 3);

// Same sampling process for length 3, accumulated straight into an
// empirical distribution. This is the fast path for large counts.
TrailDistribution sample_distribution(const Mixture& mixture, std::uint64_t count,
                                      std::uint64_t seed);

// Empirical distribution of a multiset of length-3 trails.
TrailDistribution empirical_distribution(int n, const TrailMultiset& trails);

// Worker count taken from MCMIX_THREADS, falling back to the hardware.
int worker_threads();

}  // namespace mcmix
