#pragma once

#include <string>
#include <vector>

#include "mcmix/mixture.hpp"
#include "mcmix/trail_distribution.hpp"

namespace mcmix {

struct SpectrumSummary {
  Vector sigma_bar;  // mean over j of the i-th singular value of O_j
  Vector ratios;     // floored sigma_bar_i / sigma_bar_{i+1}, length n - 1
  int chosen_L = 0;
  std::vector<Vector> per_state;
  double floor = 0.0;
};

// chosen_L maximizes the floored ratio over 1 <= i <= n / 2, ties to the
// smaller i. floor_scale * sigma_bar_1 is added to both sides of each ratio.
SpectrumSummary spectrum_summary(const TrailDistribution& dist, double floor_scale = 1e-12);

struct DegenBounds {
  double lower = 0.0;    // sigma_L(P_j) * sigma_L(M+_j)
  double sigma_L = 0.0;  // sigma_L(O_j)
  double upper = 0.0;    // sqrt(L) * min(sigma_L(P_j), sigma_L(M+_j))
  bool holds = false;    // lower <= sigma_L <= upper with 1e-10 slack
};

DegenBounds degen_bounds(const Mixture& mixture, int j);

struct RankEstimate {
  int r_hat = 0;
  Vector svals;  // singular values of A', non-increasing
  double gap_ratio = 0.0;
  std::vector<std::string> warnings;
};

// Picks the largest floored ratio between consecutive singular values in
// the tail window of size min(m, 2L * min(n, 8)); r_hat counts the values
// below the gap and is at least L.
RankEstimate choose_r(const Vector& svals, int L, int n);

RankEstimate estimate_r(const TrailDistribution& dist, int L);

// Vertex ids: j+ is j, j- is n + j.
struct CutMatrix {
  std::vector<int> S;
  std::vector<std::pair<int, int>> columns;  // (i, j) for column (i-, j+)
  Matrix values;                             // L x columns.size()
  double sigma_L() const;
};

// Only columns crossing the cut with some positive entry are stored.
CutMatrix cut_matrix(const Mixture& mixture, const std::vector<int>& S);

struct SigmaBound {
  double lhs = 0.0;  // sigma_{2Ln-r}(A)
  double rhs = 0.0;  // sigma_L(Q_S) / |S|
  bool holds = false;          // lhs <= rhs + 1e-10
  bool holds_squared = false;  // lhs^2 <= rhs + 1e-10
};

SigmaBound sigma_bound_check(const Mixture& mixture, const std::vector<int>& S);

struct TvBound {
  double lhs_sq = 0.0;  // sigma_{2Ln-r}(A)^2
  double tv = 0.0;      // (1 / 2n) sum_ij |M^a_ij - M^b_ij|
  bool holds = false;
};

TvBound tv_bound_check(const Mixture& mixture, int a, int b);

// sigma_{2Ln-r}(A) of the ground-truth shuffle matrix, r from the component structure.
double smallest_nonzero_shuffle_sigma(const Mixture& mixture);

}  // namespace mcmix
