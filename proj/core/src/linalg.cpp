#include "mcmix/linalg.hpp"

#include <algorithm>

namespace mcmix {

Svd thin_svd(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Vector singular_values(const Matrix& a) {
  if (a.size() == 0) return Vector();
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

double sigma_k(const Matrix& a, int k) {
  const Vector s = singular_values(a);
  return (k >= 1 && k <= s.size()) ? s(k - 1) : 0.0;
}

LeftSpectrum left_spectrum(const Matrix& a) {
  const auto rows = a.rows();
  LeftSpectrum out;
  out.sigma = Vector::Zero(rows);
  if (a.cols() > rows) {
    // A = R^T Q^T, so A and the square R^T share singular values and left
    // singular vectors. The SVD then only touches a rows x rows matrix.
    Eigen::HouseholderQR<Matrix> qr(a.transpose());
    const Matrix rt = qr.matrixQR().topRows(rows).triangularView<Eigen::Upper>().toDenseMatrix().transpose();
    Eigen::BDCSVD<Matrix> svd(rt, Eigen::ComputeFullU);
    out.U = svd.matrixU();
    out.sigma = svd.singularValues();
  } else {
    Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeFullU);
    out.U = svd.matrixU();
    out.sigma.head(svd.singularValues().size()) = svd.singularValues();
  }
  return out;
}

Matrix pinv(const Matrix& a, double rel_tol) {
  const Svd s = thin_svd(a);
  if (s.sigma.size() == 0 || s.sigma(0) == 0.0) return Matrix::Zero(a.cols(), a.rows());
  const double cut = rel_tol * s.sigma(0);
  Vector inv = Vector::Zero(s.sigma.size());
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i) {
    if (s.sigma(i) > cut) inv(i) = 1.0 / s.sigma(i);
  }
  return s.V * inv.asDiagonal() * s.U.transpose();
}

Matrix pinv_rank(const Matrix& a, int k) {
  const Svd s = thin_svd(a);
  Vector inv = Vector::Zero(s.sigma.size());
  const auto keep = std::min<Eigen::Index>(k, s.sigma.size());
  for (Eigen::Index i = 0; i < keep; ++i) {
    if (s.sigma(i) > 0.0) inv(i) = 1.0 / s.sigma(i);
  }
  return s.V * inv.asDiagonal() * s.U.transpose();
}

Matrix random_orthogonal(int r, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(r, r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix rr = qr.matrixQR();
  for (int j = 0; j < r; ++j) {
    if (rr(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace mcmix
