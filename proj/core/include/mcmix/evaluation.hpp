#pragma once

#include <vector>

#include "mcmix/mixture.hpp"
#include "mcmix/trail_distribution.hpp"

namespace mcmix {

struct MatchResult {
  std::vector<int> permutation;  // truth chain l is matched to learned chain permutation[l]
  double cost = 0.0;
  std::vector<double> per_chain_tv;
};

// Half the l1 distance. Throws ShapeMismatch on differing lengths.
double tv_distance(const Vector& p, const Vector& q);

// Minimum-cost perfect matching on a square matrix. Among optimal matchings
// the lexicographically smallest permutation is returned.
MatchResult hungarian(const Matrix& cost);

struct RecoveryError {
  MatchResult match;
  double value = 0.0;      // (1 / 2Ln) * matched cost
  double start_tv = 0.0;   // TV of flattened starts under the same matching
};

RecoveryError recovery_error(const Mixture& truth, const Mixture& learned);

// TV distance between two distributions over [n]^3.
double trail_error(const TrailDistribution& p, const TrailDistribution& q);

}  // namespace mcmix
