#pragma once

// Shared fixtures and brute-force oracles. The oracles are deliberately
// naive re-derivations that share no code with the library.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "mcmix/mixture.hpp"

namespace fixtures {

using mcmix::Matrix;
using mcmix::Mixture;
using mcmix::Vector;

// Two chains on four states. Chain 1 splits into {1,2} and {3,4}, chain 2
// is connected; transitions are uniform over successors and every start
// probability is 1/8 (0-indexed successors below).
inline Mixture worked_example() {
  std::vector<Matrix> chains;
  chains.push_back(mcmix::uniform_chain(4, {{0, 1}, {0}, {3}, {2, 3}}));
  chains.push_back(mcmix::uniform_chain(4, {{2}, {1, 3}, {0, 1, 2}, {1}}));
  return Mixture(Matrix::Constant(2, 4, 1.0 / 8.0), std::move(chains));
}

// p(i, j, k) by a direct sum over chains.
inline double trail_probability(const Mixture& m, int i, int j, int k) {
  double p = 0.0;
  for (int l = 0; l < m.L(); ++l) p += m.start()(l, i) * m.chains()[l](i, j) * m.chains()[l](j, k);
  return p;
}

// Minimum over all permutations, with the lexicographically first optimum.
struct BruteMatch {
  std::vector<int> perm;
  double cost = std::numeric_limits<double>::infinity();
};

inline BruteMatch brute_force_match(const Matrix& cost) {
  const int L = static_cast<int>(cost.rows());
  std::vector<int> perm(static_cast<size_t>(L));
  std::iota(perm.begin(), perm.end(), 0);
  BruteMatch best;
  do {
    double c = 0.0;
    for (int a = 0; a < L; ++a) c += cost(a, perm[static_cast<size_t>(a)]);
    if (c < best.cost) {
      best.cost = c;
      best.perm = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Dense random mixture drawn independently of the library generator.
inline Mixture random_dense(int n, int L, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<Matrix> chains;
  for (int l = 0; l < L; ++l) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) m(i, j) = u(rng);
      m.row(i) /= m.row(i).sum();
    }
    chains.push_back(m);
  }
  Matrix s(L, n);
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < n; ++i) s(l, i) = u(rng);
  }
  s /= s.sum();
  return Mixture(s, std::move(chains));
}

// Half the l1 distance, written out.
inline double tv(const Vector& p, const Vector& q) {
  double t = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) t += std::abs(p(i) - q(i));
  return t / 2.0;
}

}  // namespace fixtures
