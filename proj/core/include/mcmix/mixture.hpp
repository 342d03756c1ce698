#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mcmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A mixture of L Markov chains on n states (0-indexed internally).
//
// start(l, i) is the joint probability of picking chain l and starting in
// state i, so the whole L x n matrix sums to one. chains[l] is the row
// stochastic transition matrix of chain l.
class Mixture {
 public:
  Mixture() = default;
  Mixture(Matrix start, std::vector<Matrix> chains);

  int n() const { return static_cast<int>(start_.cols()); }
  int L() const { return static_cast<int>(start_.rows()); }

  const Matrix& start() const { return start_; }
  const std::vector<Matrix>& chains() const { return chains_; }
  const Matrix& chain(int l) const { return chains_.at(static_cast<size_t>(l)); }

  double s(int l, int i) const { return start_(l, i); }
  double M(int l, int i, int j) const { return chains_[static_cast<size_t>(l)](i, j); }

  // Throws Error(InvalidArgument) describing the first violated invariant.
  void validate(double tol = 1e-12) const;
  bool is_valid(double tol = 1e-12) const noexcept;

  // Chains reordered so that chain l of the result is chain perm[l] of this.
  Mixture permuted(std::span<const int> perm) const;

 private:
  Matrix start_;
  std::vector<Matrix> chains_;
};

// Clips negative entries to zero and renormalizes every transition row and
// the start matrix. Rows that end up empty become uniform. Returns the list
// of human-readable warnings describing what was changed.
std::vector<std::string> sanitize(Matrix& start, std::vector<Matrix>& chains);

// Uniform-transition chain helper used by fixtures: each row i is uniform
// over the listed successors of i.
Matrix uniform_chain(int n, const std::vector<std::vector<int>>& successors);

}  // namespace mcmix
