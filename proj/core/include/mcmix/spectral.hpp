#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmix/assignment.hpp"
#include "mcmix/mixture.hpp"
#include "mcmix/trail_distribution.hpp"

namespace mcmix {

struct CokernelFactorization {
  int n = 0;
  int L = 0;
  int r = 0;
  std::vector<Matrix> Pp;  // P'_j, L x n
  std::vector<Matrix> Qp;  // Q'_j, L x n
  std::vector<Matrix> Yp;  // Y'_j, r x L
  std::vector<Matrix> Zp;  // Z'_j, r x L
  std::vector<Vector> svals;     // singular values of O_j
  Vector cokernel_svals;         // singular values of A', length 2Ln
  std::vector<std::string> warnings;
};

enum class RecoveryMode { Auto, Exact, Noisy };

// Penrose: deviation of B_ij, B_ji from being mutual pseudoinverses.
// Subspace: sine of the largest principal angle between the column spans of
// [Y'_i Z'_i] and [Y'_j Z'_j]; 0 for companions, 1 otherwise, and far less
// sensitive to sampling noise. Auto picks Penrose on exact input.
enum class CompanionMetric { Auto, Penrose, Subspace };

struct RecoveryOptions {
  RecoveryMode mode = RecoveryMode::Auto;
  double tau_ker = 1e-8;
  double tau_rank = 1e-8;
  double tau_row = 1e-6;
  double tau_dup = 1e-6;
  double tau_eig = 1e-8;
  double tau_imag = 1e-6;
  double tau_scale = 1e-10;
  double tau_start = 1e-9;
  // Companionship cutoff on the deviation score; negative picks the mode
  // default (1e-9 Penrose, 0.5 subspace).
  double companion_threshold = -1.0;
  CompanionMetric metric = CompanionMetric::Auto;
  // Score pairs with random probes instead of full Penrose residuals.
  bool fast_scores = false;
  // 0 picks the mode default (1 exact, 5 noisy).
  int repetitions = 0;
  std::uint64_t seed = 0;
  // When false, spectral failures in later stages (complex eigenvalues,
  // degenerate ratios, vanishing scales) become warnings and the pipeline
  // keeps going with its best guess.
  bool strict = true;
};

struct CompanionshipClasses {
  std::vector<std::vector<int>> classes;  // each sorted, classes ordered by first member
  std::vector<int> representatives;
  std::vector<int> companions;
  Matrix scores;  // n x n deviation scores, +inf on the diagonal
};

struct RecoveryReport {
  Mixture mixture;
  CompanionshipClasses classes;
  int r_used = 0;
  std::vector<int> assignment;                   // component -> chain label
  std::vector<std::vector<int>> component_sets;  // C(j) per representative
  double residual_trail_error = 0.0;
  bool noisy = false;
  int repetition = 0;
  std::vector<std::string> warnings;
};

// Rank-L truncated SVD of every O_j: O_j ~ P'_j^T Q'_j.
CokernelFactorization svd_factor(const TrailDistribution& dist, int L);

// Shuffle matrix A' built from P'_j and Q'_j.
Matrix factor_shuffle_matrix(const CokernelFactorization& fact);

// Orthonormal rows spanning the left null space of a. Without r_hint the
// dimension is the number of singular values at most tol * sigma_1.
Matrix cokernel_basis(const Matrix& a, std::optional<int> r_hint, double tol, Vector* svals = nullptr);

// Fills Yp, Zp, r and cokernel_svals from the co-kernel of A'.
void attach_cokernel(CokernelFactorization& fact, std::optional<int> r_hint, double tol);

// Replaces the co-kernel basis by mix * basis (mix is r x r).
void remix_cokernel(CokernelFactorization& fact, const Matrix& mix);

// B_ij = (Z'_j Y'_j^T)^+ (Z'_i Y'_i^T), pseudoinverse taken at rank L.
Matrix companion_product(int i, int j, const CokernelFactorization& fact);

// Zero in exact arithmetic iff i and j are companions. Symmetric in (i, j).
double companionship_score(int i, int j, const CokernelFactorization& fact,
                           const RecoveryOptions& options = {});

// Subspace distance between states i and j, in [0, 1].
double subspace_score(int i, int j, const CokernelFactorization& fact);

CompanionshipClasses companionship_classes(const CokernelFactorization& fact, double threshold,
                                           const TrailDistribution& dist, const RecoveryOptions& options = {});

// Smallest relative gap between the L leading eigenvalues of B_ij.
double eigen_separation(int j, int i, const CokernelFactorization& fact);

// Rows are eigenvector directions of B_ij restricted to its rank-L range.
Matrix eigendecompose_pair(int j, int i, const CokernelFactorization& fact, const RecoveryOptions& options = {},
                           std::vector<std::string>* warnings = nullptr);

// Returns diag(d) * Rt with d chosen so the column sums of the implied P_j
// reproduce O_j 1_n.
Matrix fix_scaling(int j, const Matrix& Rt, const CokernelFactorization& fact, const TrailDistribution& dist,
                   const RecoveryOptions& options = {}, std::vector<std::string>* warnings = nullptr);

struct AssembledR {
  Matrix PiR;                                // r x r
  std::vector<std::vector<int>> component_sets;  // C(j) per representative, in input order
};

// Collects the columns of every scaled R_j^+ and inverts their span.
AssembledR assemble_R(const std::vector<Matrix>& scaled, const std::vector<int>& representatives,
                      const CokernelFactorization& fact, bool noisy, const RecoveryOptions& options = {},
                      std::vector<std::string>* warnings = nullptr);

RecoveryReport reconstruct_mixture(const std::vector<int>& assignment, const Matrix& PiR,
                                   const CokernelFactorization& fact, const CompanionshipClasses& classes,
                                   const TrailDistribution& dist, const RecoveryOptions& options = {});

// Runs everything after svd_factor/attach_cokernel.
RecoveryReport recover_from_factorization(const CokernelFactorization& fact, const TrailDistribution& dist,
                                          const RecoveryOptions& options = {});

RecoveryReport ca_svd(const TrailDistribution& dist, int L, std::optional<int> r = std::nullopt,
                      const RecoveryOptions& options = {});

// Connected-chain baseline: co-kernel of dimension L, one class, no merging.
RecoveryReport gkv_svd(const TrailDistribution& dist, int L, const RecoveryOptions& options = {});

}  // namespace mcmix
