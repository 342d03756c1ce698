#pragma once

#include <random>

#include "mcmix/mixture.hpp"

namespace mcmix {

struct Svd {
  Matrix U;      // left singular vectors as columns
  Vector sigma;  // non-increasing
  Matrix V;      // right singular vectors as columns
};

// Thin SVD, A = U diag(sigma) V^T.
Svd thin_svd(const Matrix& a);

// Singular values in non-increasing order.
Vector singular_values(const Matrix& a);

// k-th largest singular value (1-based); zero when k exceeds min(rows, cols).
double sigma_k(const Matrix& a, int k);

// Left singular vectors and values of a wide or tall matrix, with every left
// singular vector present (U is rows x rows). Values beyond min(rows, cols)
// are reported as zero.
struct LeftSpectrum {
  Matrix U;
  Vector sigma;  // length rows, non-increasing
};
LeftSpectrum left_spectrum(const Matrix& a);

// Pseudoinverse keeping singular values above rel_tol * sigma_1.
Matrix pinv(const Matrix& a, double rel_tol);

// Pseudoinverse of the best rank-k approximation.
Matrix pinv_rank(const Matrix& a, int k);

// Haar-distributed orthogonal matrix.
Matrix random_orthogonal(int r, std::mt19937_64& rng);

}  // namespace mcmix
