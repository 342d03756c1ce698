#include "mcmix/params.hpp"

#include <algorithm>
#include <cmath>

#include "mcmix/error.hpp"
#include "mcmix/linalg.hpp"
#include "mcmix/spectral.hpp"
#include "mcmix/structure.hpp"

namespace mcmix {

SpectrumSummary spectrum_summary(const TrailDistribution& dist, double floor_scale) {
  const int n = dist.n();
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "spectrum_summary: need n >= 2");
  SpectrumSummary out;
  out.sigma_bar = Vector::Zero(n);
  const auto slices = dist.slices();
  for (int j = 0; j < n; ++j) {
    Vector s = singular_values(slices[static_cast<size_t>(j)]);
    out.sigma_bar += s;
    out.per_state.push_back(std::move(s));
  }
  out.sigma_bar /= n;
  out.floor = floor_scale * out.sigma_bar(0);
  if (!(out.sigma_bar(0) > 0.0)) throw Error(ErrorKind::EmptySpectrum, "empty spectrum");
  out.ratios = Vector::Zero(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    out.ratios(i) = (out.sigma_bar(i) + out.floor) / (out.sigma_bar(i + 1) + out.floor);
  }
  out.chosen_L = 1;
  for (int i = 2; i <= n / 2; ++i) {
    if (out.ratios(i - 1) > out.ratios(out.chosen_L - 1)) out.chosen_L = i;
  }
  return out;
}

DegenBounds degen_bounds(const Mixture& mixture, int j) {
  if (j < 0 || j >= mixture.n()) throw Error(ErrorKind::IndexOutOfRange, "degen_bounds: state index out of range");
  const int L = mixture.L();
  const GroundTruthFactors f = ground_truth_factors(mixture);
  const double sp = sigma_k(f.P[static_cast<size_t>(j)], L);
  const double sm = sigma_k(f.Mplus[static_cast<size_t>(j)], L);
  const Matrix o = f.P[static_cast<size_t>(j)].transpose() * f.Mplus[static_cast<size_t>(j)];
  DegenBounds b;
  b.lower = sp * sm;
  b.sigma_L = sigma_k(o, L);
  b.upper = std::sqrt(static_cast<double>(L)) * std::min(sp, sm);
  b.holds = b.lower <= b.sigma_L + 1e-10 && b.sigma_L <= b.upper + 1e-10;
  return b;
}

RankEstimate choose_r(const Vector& svals, int L, int n) {
  const int m = static_cast<int>(svals.size());
  RankEstimate est;
  est.svals = svals;
  if (m < 2 || L < 1 || L >= m) throw Error(ErrorKind::InvalidArgument, "choose_r: spectrum too short");
  const int window = std::min(m, 2 * L * std::min(n, 8));
  const double eps = 1e-13 * svals(0);
  // Gap after position g (1-based): r_hat = m - g.
  int best_r = L;
  double best = -1.0;
  for (int r = L; r <= window - 1; ++r) {
    const int g = m - r;
    const double ratio = (svals(g - 1) + eps) / (svals(g) + eps);
    if (ratio > best) {
      best = ratio;
      best_r = r;
    }
  }
  est.r_hat = best_r;
  est.gap_ratio = best;
  if (best < 10.0) est.warnings.emplace_back("ambiguous r");
  return est;
}

RankEstimate estimate_r(const TrailDistribution& dist, int L) {
  const CokernelFactorization fact = svd_factor(dist, L);
  const LeftSpectrum spec = left_spectrum(factor_shuffle_matrix(fact));
  return choose_r(spec.sigma, L, dist.n());
}

double CutMatrix::sigma_L() const {
  const auto L = values.rows();
  if (values.cols() < L) return 0.0;
  return sigma_k(values, static_cast<int>(L));
}

CutMatrix cut_matrix(const Mixture& mixture, const std::vector<int>& S) {
  const int n = mixture.n();
  const int L = mixture.L();
  std::vector<char> in(static_cast<size_t>(2 * n), 0);
  for (int v : S) {
    if (v < 0 || v >= 2 * n) throw Error(ErrorKind::IndexOutOfRange, "cut_matrix: vertex out of range");
    in[static_cast<size_t>(v)] = 1;
  }
  const auto size = std::count(in.begin(), in.end(), 1);
  if (size == 0 || size == 2 * n) throw Error(ErrorKind::InvalidArgument, "cut_matrix: cut must be a proper non-empty subset");
  CutMatrix c;
  for (int v = 0; v < 2 * n; ++v) {
    if (in[static_cast<size_t>(v)]) c.S.push_back(v);
  }
  std::vector<Vector> cols;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (in[static_cast<size_t>(n + i)] == in[static_cast<size_t>(j)]) continue;
      Vector col(L);
      for (int l = 0; l < L; ++l) col(l) = mixture.s(l, i) * mixture.M(l, i, j);
      if (col.cwiseAbs().maxCoeff() == 0.0) continue;
      c.columns.emplace_back(i, j);
      cols.push_back(std::move(col));
    }
  }
  c.values = Matrix::Zero(L, static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k) c.values.col(static_cast<Eigen::Index>(k)) = cols[k];
  return c;
}

double smallest_nonzero_shuffle_sigma(const Mixture& mixture) {
  const ComponentStructure cs = component_structure(mixture);
  const GroundTruthFactors f = ground_truth_factors(mixture);
  const LeftSpectrum spec = left_spectrum(build_shuffle_matrix(f.P, f.Q));
  const int idx = 2 * mixture.L() * mixture.n() - cs.r;
  return idx >= 1 ? spec.sigma(idx - 1) : 0.0;
}

SigmaBound sigma_bound_check(const Mixture& mixture, const std::vector<int>& S) {
  const RecoverabilityReport rep = verify_recoverability(mixture);
  if (!rep.companion_connected || !rep.cokernel_dim_equals_r) {
    throw Error(ErrorKind::InvalidArgument,
                "sigma_bound_check: mixture must be companion-connected with co-kernel spanned by indicators");
  }
  const CutMatrix c = cut_matrix(mixture, S);
  SigmaBound b;
  b.lhs = smallest_nonzero_shuffle_sigma(mixture);
  b.rhs = c.sigma_L() / static_cast<double>(c.S.size());
  b.holds = b.lhs <= b.rhs + 1e-10;
  b.holds_squared = b.lhs * b.lhs <= b.rhs + 1e-10;
  return b;
}

TvBound tv_bound_check(const Mixture& mixture, int a, int b) {
  if (a == b) throw Error(ErrorKind::InvalidArgument, "tv_bound_check: chains must differ");
  if (a < 0 || b < 0 || a >= mixture.L() || b >= mixture.L()) {
    throw Error(ErrorKind::IndexOutOfRange, "tv_bound_check: chain index out of range");
  }
  TvBound t;
  const double s = smallest_nonzero_shuffle_sigma(mixture);
  t.lhs_sq = s * s;
  t.tv = (mixture.chain(a) - mixture.chain(b)).cwiseAbs().sum() / (2.0 * mixture.n());
  t.holds = t.lhs_sq <= t.tv + 1e-10;
  return t;
}

}  // namespace mcmix
