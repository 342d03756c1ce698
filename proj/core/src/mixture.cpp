#include "mcmix/mixture.hpp"

#include <cmath>
#include <sstream>

#include "mcmix/error.hpp"

namespace mcmix {

Mixture::Mixture(Matrix start, std::vector<Matrix> chains)
    : start_(std::move(start)), chains_(std::move(chains)) {
  if (static_cast<Eigen::Index>(chains_.size()) != start_.rows()) {
    throw Error(ErrorKind::ShapeMismatch,
                "mixture: start has " + std::to_string(start_.rows()) +
                    " rows but " + std::to_string(chains_.size()) + " chains given");
  }
  for (const auto& m : chains_) {
    if (m.rows() != start_.cols() || m.cols() != start_.cols()) {
      throw Error(ErrorKind::ShapeMismatch, "mixture: transition matrix is not n x n");
    }
  }
}

void Mixture::validate(double tol) const {
  if (L() < 1 || n() < 1) {
    throw Error(ErrorKind::InvalidArgument, "mixture: need n >= 1 and L >= 1");
  }
  if ((start_.array() < 0.0).any() || !start_.allFinite()) {
    throw Error(ErrorKind::InvalidArgument, "mixture: negative or non-finite start probability");
  }
  const double total = start_.sum();
  if (std::abs(total - 1.0) > tol) {
    std::ostringstream os;
    os << "mixture: start probabilities sum to " << total;
    throw Error(ErrorKind::InvalidArgument, os.str());
  }
  for (int l = 0; l < L(); ++l) {
    const Matrix& m = chains_[static_cast<size_t>(l)];
    if ((m.array() < 0.0).any() || !m.allFinite()) {
      throw Error(ErrorKind::InvalidArgument,
                  "mixture: chain " + std::to_string(l + 1) + " has a negative entry");
    }
    for (int i = 0; i < n(); ++i) {
      const double row = m.row(i).sum();
      if (std::abs(row - 1.0) > tol) {
        std::ostringstream os;
        os << "mixture: row " << i + 1 << " of chain " << l + 1 << " sums to " << row;
        throw Error(ErrorKind::InvalidArgument, os.str());
      }
    }
  }
}

bool Mixture::is_valid(double tol) const noexcept {
  try {
    validate(tol);
    return true;
  } catch (const Error&) {
    return false;
  }
}

Mixture Mixture::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != L()) {
    throw Error(ErrorKind::ShapeMismatch, "mixture: permutation has wrong length");
  }
  Matrix start(L(), n());
  std::vector<Matrix> chains(static_cast<size_t>(L()));
  for (int l = 0; l < L(); ++l) {
    start.row(l) = start_.row(perm[static_cast<size_t>(l)]);
    chains[static_cast<size_t>(l)] = chains_.at(static_cast<size_t>(perm[static_cast<size_t>(l)]));
  }
  return Mixture(std::move(start), std::move(chains));
}

std::vector<std::string> sanitize(Matrix& start, std::vector<Matrix>& chains) {
  // Round-off negatives are clipped silently; only larger ones are reported.
  constexpr double kRoundoff = 1e-12;
  std::vector<std::string> warnings;
  int clipped = 0;
  for (auto& m : chains) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (!(m(i, j) >= 0.0)) {
          if (!(m(i, j) >= -kRoundoff)) ++clipped;
          m(i, j) = 0.0;
        }
      }
      const double row = m.row(i).sum();
      if (row > 0.0) {
        m.row(i) /= row;
      } else {
        m.row(i).setConstant(1.0 / static_cast<double>(m.cols()));
        warnings.push_back("empty transition row " + std::to_string(i + 1) + " replaced by uniform");
      }
    }
  }
  for (Eigen::Index l = 0; l < start.rows(); ++l) {
    for (Eigen::Index i = 0; i < start.cols(); ++i) {
      if (!(start(l, i) >= 0.0)) {
        if (!(start(l, i) >= -kRoundoff)) ++clipped;
        start(l, i) = 0.0;
      }
    }
  }
  const double total = start.sum();
  if (total > 0.0) {
    start /= total;
  } else {
    start.setConstant(1.0 / static_cast<double>(start.size()));
    warnings.emplace_back("all start probabilities vanished; replaced by uniform");
  }
  if (clipped > 0) {
    warnings.push_back("clipped " + std::to_string(clipped) + " negative entries to zero");
  }
  return warnings;
}

Matrix uniform_chain(int n, const std::vector<std::vector<int>>& successors) {
  Matrix m = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto& succ = successors.at(static_cast<size_t>(i));
    for (int j : succ) m(i, j) = 1.0 / static_cast<double>(succ.size());
  }
  return m;
}

}  // namespace mcmix
