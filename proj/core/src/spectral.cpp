#include "mcmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>

#include "mcmix/error.hpp"
#include "mcmix/evaluation.hpp"
#include "mcmix/linalg.hpp"
#include "mcmix/params.hpp"
#include "mcmix/structure.hpp"

namespace mcmix {
namespace {

constexpr double kExactCompanionThreshold = 1e-9;
constexpr double kSubspaceCompanionThreshold = 0.5;

bool resolve_noisy(const RecoveryOptions& options, const TrailDistribution& dist) {
  switch (options.mode) {
    case RecoveryMode::Exact:
      return false;
    case RecoveryMode::Noisy:
      return true;
    case RecoveryMode::Auto:
      break;
  }
  return !dist.is_exact();
}

// Strict failures become warnings when the caller asked for leniency.
bool use_subspace(const RecoveryOptions& options, bool noisy) {
  switch (options.metric) {
    case CompanionMetric::Penrose:
      return false;
    case CompanionMetric::Subspace:
      return true;
    case CompanionMetric::Auto:
      break;
  }
  return noisy;
}

// Orthonormal r x L basis of the span of [Y'_j Z'_j].
Matrix state_span(int j, const CokernelFactorization& fact) {
  Matrix c(fact.r, 2 * fact.L);
  c << fact.Yp[static_cast<size_t>(j)], fact.Zp[static_cast<size_t>(j)];
  const int k = std::min(fact.L, fact.r);
  return thin_svd(c).U.leftCols(k);
}

double span_distance(const Matrix& a, const Matrix& b) {
  const Vector c = singular_values(a.transpose() * b);
  const double lo = c.size() > 0 ? std::min(1.0, c.minCoeff()) : 0.0;
  return std::sqrt(std::max(0.0, 1.0 - lo * lo));
}

void fail_or_warn(bool strict, ErrorKind kind, const std::string& message, std::vector<std::string>* warnings) {
  if (strict) throw Error(kind, message);
  if (warnings) warnings->push_back(message);
}

void check_factorization(const CokernelFactorization& fact) {
  if (fact.r < 1 || static_cast<int>(fact.Yp.size()) != fact.n || static_cast<int>(fact.Zp.size()) != fact.n) {
    throw Error(ErrorKind::InvalidArgument, "factorization has no co-kernel basis attached");
  }
}

void attach_rows(CokernelFactorization& fact, const Matrix& basis) {
  const int n = fact.n;
  const int L = fact.L;
  fact.r = static_cast<int>(basis.rows());
  fact.Yp.assign(static_cast<size_t>(n), Matrix());
  fact.Zp.assign(static_cast<size_t>(n), Matrix());
  for (int j = 0; j < n; ++j) {
    fact.Yp[static_cast<size_t>(j)] = basis.middleCols(j * L, L);
    fact.Zp[static_cast<size_t>(j)] = basis.middleCols(L * n + j * L, L);
  }
}

Matrix basis_rows(const LeftSpectrum& spec, int r) { return spec.U.rightCols(r).transpose(); }

struct PairSpectrum {
  Matrix UL;                               // r x L range basis of B
  Eigen::VectorXcd values;                 // eigenvalues of the restricted map
  Eigen::MatrixXcd vectors;                // eigenvectors in range coordinates
};

PairSpectrum pair_spectrum(int j, int i, const CokernelFactorization& fact) {
  const Matrix b = companion_product(i, j, fact);
  const Svd s = thin_svd(b);
  const int L = fact.L;
  PairSpectrum ps;
  ps.UL = s.U.leftCols(L);
  const Matrix k = s.sigma.head(L).asDiagonal() * s.V.leftCols(L).transpose() * ps.UL;
  Eigen::EigenSolver<Matrix> es(k, true);
  ps.values = es.eigenvalues();
  ps.vectors = es.eigenvectors();
  return ps;
}

double separation_of(const Eigen::VectorXcd& values) {
  const auto L = values.size();
  if (L < 2) return 1.0;
  double scale = 0.0;
  for (Eigen::Index a = 0; a < L; ++a) scale = std::max(scale, std::abs(values(a)));
  if (scale == 0.0) return 0.0;
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < L; ++a) {
    for (Eigen::Index b = a + 1; b < L; ++b) gap = std::min(gap, std::abs(values(a) - values(b)));
  }
  return gap / scale;
}

double penrose_residual(const Matrix& b, const Matrix& c) {
  const double nb = b.norm();
  if (nb == 0.0) return std::numeric_limits<double>::infinity();
  return (b * c * b - b).norm() / nb;
}

double probe_residual(const Matrix& b, const Matrix& c, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr int kProbes = 8;
  double total = 0.0;
  for (int p = 0; p < kProbes; ++p) {
    Vector x(b.cols());
    for (Eigen::Index t = 0; t < x.size(); ++t) x(t) = normal(rng);
    const Vector bx = b * x;
    const double nbx = bx.norm();
    if (nbx == 0.0) return std::numeric_limits<double>::infinity();
    total += (b * (c * bx) - bx).norm() / nbx;
  }
  return total / kProbes;
}

bool rank_deficient(const Matrix& b, int L, double tau_rank) {
  const Vector s = singular_values(b);
  if (s.size() < L || s(0) == 0.0) return true;
  return s(L - 1) < tau_rank * s(0);
}

std::string state_name(int j) { return "state " + std::to_string(j + 1); }

}  // namespace

CokernelFactorization svd_factor(const TrailDistribution& dist, int L) {
  const int n = dist.n();
  if (L < 1 || 2 * L > n) {
    throw Error(ErrorKind::InvalidArgument, "svd_factor: need 1 <= L <= n / 2 (n = " + std::to_string(n) +
                                                ", L = " + std::to_string(L) + ")");
  }
  CokernelFactorization f;
  f.n = n;
  f.L = L;
  f.Pp.assign(static_cast<size_t>(n), Matrix::Zero(L, n));
  f.Qp.assign(static_cast<size_t>(n), Matrix::Zero(L, n));
  f.svals.assign(static_cast<size_t>(n), Vector::Zero(n));
  const std::vector<Matrix> slices = dist.slices();
  for (int j = 0; j < n; ++j) {
    const Matrix& o = slices[static_cast<size_t>(j)];
    if (o.cwiseAbs().maxCoeff() == 0.0) {
      f.warnings.push_back("unvisited state " + std::to_string(j + 1));
      continue;
    }
    const Svd s = thin_svd(o);
    f.svals[static_cast<size_t>(j)] = s.sigma;
    f.Pp[static_cast<size_t>(j)] = s.U.leftCols(L).transpose();
    f.Qp[static_cast<size_t>(j)] = s.sigma.head(L).asDiagonal() * s.V.leftCols(L).transpose();
  }
  return f;
}

Matrix factor_shuffle_matrix(const CokernelFactorization& fact) { return build_shuffle_matrix(fact.Pp, fact.Qp); }

Matrix cokernel_basis(const Matrix& a, std::optional<int> r_hint, double tol, Vector* svals) {
  const LeftSpectrum spec = left_spectrum(a);
  if (svals) *svals = spec.sigma;
  const int m = static_cast<int>(a.rows());
  int r = 0;
  if (r_hint) {
    r = *r_hint;
    if (r < 1 || r > m) {
      throw Error(ErrorKind::InvalidArgument, "cokernel_basis: requested dimension " + std::to_string(r) +
                                                  " outside [1, " + std::to_string(m) + "]");
    }
  } else {
    const double cut = tol * (m > 0 ? spec.sigma(0) : 0.0);
    for (int i = 0; i < m; ++i) {
      if (spec.sigma(i) <= cut) ++r;
    }
    if (r == 0 || r == m) throw Error(ErrorKind::CannotDetermineRank, "cannot determine r");
  }
  return basis_rows(spec, r);
}

void attach_cokernel(CokernelFactorization& fact, std::optional<int> r_hint, double tol) {
  Vector svals;
  const Matrix basis = cokernel_basis(factor_shuffle_matrix(fact), r_hint, tol, &svals);
  fact.cokernel_svals = svals;
  attach_rows(fact, basis);
}

void remix_cokernel(CokernelFactorization& fact, const Matrix& mix) {
  check_factorization(fact);
  if (mix.rows() != fact.r || mix.cols() != fact.r) {
    throw Error(ErrorKind::ShapeMismatch, "remix_cokernel: mixing matrix must be r x r");
  }
  for (int j = 0; j < fact.n; ++j) {
    fact.Yp[static_cast<size_t>(j)] = mix * fact.Yp[static_cast<size_t>(j)];
    fact.Zp[static_cast<size_t>(j)] = mix * fact.Zp[static_cast<size_t>(j)];
  }
}

Matrix companion_product(int i, int j, const CokernelFactorization& fact) {
  check_factorization(fact);
  if (i < 0 || j < 0 || i >= fact.n || j >= fact.n) {
    throw Error(ErrorKind::IndexOutOfRange, "companion_product: state index out of range");
  }
  const Matrix xj = fact.Zp[static_cast<size_t>(j)] * fact.Yp[static_cast<size_t>(j)].transpose();
  const Matrix xi = fact.Zp[static_cast<size_t>(i)] * fact.Yp[static_cast<size_t>(i)].transpose();
  return pinv_rank(xj, fact.L) * xi;
}

double companionship_score(int i, int j, const CokernelFactorization& fact, const RecoveryOptions& options) {
  if (i == j) throw Error(ErrorKind::InvalidArgument, "companionship_score: states must differ");
  const Matrix bij = companion_product(i, j, fact);
  const Matrix bji = companion_product(j, i, fact);
  if (bij.norm() == 0.0 || bji.norm() == 0.0) return std::numeric_limits<double>::infinity();
  double score = 0.0;
  if (options.fast_scores) {
    std::seed_seq seq{static_cast<std::uint32_t>(std::min(i, j)), static_cast<std::uint32_t>(std::max(i, j)),
                      static_cast<std::uint32_t>(options.seed)};
    std::mt19937_64 rng(seq);
    score = probe_residual(bij, bji, rng) + probe_residual(bji, bij, rng);
  } else {
    score = penrose_residual(bij, bji) + penrose_residual(bji, bij);
  }
  if (rank_deficient(bij, fact.L, options.tau_rank) || rank_deficient(bji, fact.L, options.tau_rank)) {
    score += 1.0;
  }
  return score;
}

double subspace_score(int i, int j, const CokernelFactorization& fact) {
  check_factorization(fact);
  if (i < 0 || j < 0 || i >= fact.n || j >= fact.n) {
    throw Error(ErrorKind::IndexOutOfRange, "subspace_score: state index out of range");
  }
  if (i == j) throw Error(ErrorKind::InvalidArgument, "subspace_score: states must differ");
  return span_distance(state_span(i, fact), state_span(j, fact));
}

double eigen_separation(int j, int i, const CokernelFactorization& fact) {
  return separation_of(pair_spectrum(j, i, fact).values);
}

CompanionshipClasses companionship_classes(const CokernelFactorization& fact, double threshold,
                                           const TrailDistribution& dist, const RecoveryOptions& options) {
  check_factorization(fact);
  const int n = fact.n;
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "companionship_classes: need at least two states");
  const bool noisy = resolve_noisy(options, dist);
  CompanionshipClasses out;
  out.scores = Matrix::Constant(n, n, std::numeric_limits<double>::infinity());
  const bool subspace = use_subspace(options, noisy);
  std::vector<Matrix> spans;
  if (subspace) {
    for (int j = 0; j < n; ++j) spans.push_back(state_span(j, fact));
  }
  for (int j = 0; j < n; ++j) {
    for (int i = j + 1; i < n; ++i) {
      const double s = subspace ? span_distance(spans[static_cast<size_t>(i)], spans[static_cast<size_t>(j)])
                                : companionship_score(i, j, fact, options);
      out.scores(i, j) = s;
      out.scores(j, i) = s;
    }
  }

  std::vector<int> cls(static_cast<size_t>(n), -1);
  if (!noisy) {
    int next = 0;
    for (int j = 0; j < n; ++j) {
      if (cls[static_cast<size_t>(j)] >= 0) continue;
      cls[static_cast<size_t>(j)] = next;
      for (int i = j + 1; i < n; ++i) {
        if (cls[static_cast<size_t>(i)] < 0 && out.scores(i, j) < threshold) cls[static_cast<size_t>(i)] = next;
      }
      ++next;
    }
  } else {
    // Single linkage: connected components of the graph of pairs below threshold.
    std::vector<int> parent(static_cast<size_t>(n));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[static_cast<size_t>(x)] != x) x = parent[static_cast<size_t>(x)] =
                                                        parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      return x;
    };
    for (int j = 0; j < n; ++j) {
      for (int i = j + 1; i < n; ++i) {
        if (out.scores(i, j) < threshold) {
          const int a = find(i), b = find(j);
          parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
        }
      }
    }
    // Singletons join their closest state rather than aborting the run.
    for (int j = 0; j < n; ++j) {
      bool alone = true;
      for (int i = 0; i < n && alone; ++i) alone = (i == j) || find(i) != find(j);
      if (!alone) continue;
      int best = -1;
      for (int i = 0; i < n; ++i) {
        if (i != j && (best < 0 || out.scores(i, j) < out.scores(best, j))) best = i;
      }
      const int a = find(best), b = find(j);
      parent[static_cast<size_t>(std::max(a, b))] = std::min(a, b);
    }
    std::vector<int> label(static_cast<size_t>(n), -1);
    int next = 0;
    for (int j = 0; j < n; ++j) {
      const int root = find(j);
      if (label[static_cast<size_t>(root)] < 0) label[static_cast<size_t>(root)] = next++;
      cls[static_cast<size_t>(j)] = label[static_cast<size_t>(root)];
    }
  }

  const int count = *std::max_element(cls.begin(), cls.end()) + 1;
  out.classes.assign(static_cast<size_t>(count), {});
  for (int j = 0; j < n; ++j) out.classes[static_cast<size_t>(cls[static_cast<size_t>(j)])].push_back(j);
  for (const auto& c : out.classes) {
    if (c.size() < 2) {
      throw Error(ErrorKind::NoCompanion, "state has no companion: " + state_name(c.front()));
    }
    const int rep = c.front();
    int best = -1;
    double best_sep = -1.0;
    for (int i : c) {
      if (i == rep) continue;
      double sep = 0.0;
      try {
        sep = eigen_separation(rep, i, fact);
      } catch (const Error&) {
        sep = 0.0;
      }
      if (sep > best_sep) {
        best_sep = sep;
        best = i;
      }
    }
    out.representatives.push_back(rep);
    out.companions.push_back(best);
  }
  return out;
}

Matrix eigendecompose_pair(int j, int i, const CokernelFactorization& fact, const RecoveryOptions& options,
                           std::vector<std::string>* warnings) {
  if (i == j) throw Error(ErrorKind::InvalidArgument, "eigendecompose_pair: companion must differ from representative");
  const PairSpectrum ps = pair_spectrum(j, i, fact);
  const int L = fact.L;
  double scale = 0.0, imag = 0.0;
  for (int a = 0; a < L; ++a) {
    scale = std::max(scale, std::abs(ps.values(a)));
    imag = std::max(imag, std::abs(ps.values(a).imag()));
  }
  const std::string pair = " (" + state_name(j) + ", companion " + std::to_string(i + 1) + ")";
  if (scale == 0.0) {
    throw Error(ErrorKind::StartingRatioDegeneracy, "starting-ratio degeneracy: vanishing spectrum" + pair);
  }
  if (imag > options.tau_imag * scale) {
    fail_or_warn(options.strict, ErrorKind::NonRealSpectrum, "non-real spectrum" + pair, warnings);
  }
  if (separation_of(ps.values) < options.tau_eig) {
    fail_or_warn(options.strict, ErrorKind::StartingRatioDegeneracy, "starting-ratio degeneracy" + pair, warnings);
  }

  std::vector<int> order(static_cast<size_t>(L));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return ps.values(a).real() > ps.values(b).real(); });
  Matrix rt(L, fact.r);
  for (int row = 0; row < L; ++row) {
    const Eigen::VectorXcd y = ps.UL.cast<std::complex<double>>() * ps.vectors.col(order[static_cast<size_t>(row)]);
    Eigen::Index k = 0;
    y.cwiseAbs().maxCoeff(&k);
    const std::complex<double> phase = std::abs(y(k)) > 0.0 ? std::conj(y(k)) / std::abs(y(k)) : 1.0;
    Vector v = (y * phase).real();
    const double nv = v.norm();
    if (nv > 0.0) v /= nv;
    rt.row(row) = v.transpose();
  }
  return rt;
}

Matrix fix_scaling(int j, const Matrix& Rt, const CokernelFactorization& fact, const TrailDistribution& dist,
                   const RecoveryOptions& options, std::vector<std::string>* warnings) {
  check_factorization(fact);
  const Matrix t = Rt * fact.Yp[static_cast<size_t>(j)] * fact.Pp[static_cast<size_t>(j)];
  const Vector target = dist.slice(j).rowwise().sum();
  const Vector ts = singular_values(t);
  const int L = static_cast<int>(Rt.rows());
  if (ts.size() < L || ts(0) == 0.0 || ts(L - 1) < options.tau_rank * ts(0)) {
    fail_or_warn(options.strict, ErrorKind::ScalingUnderdetermined, "scaling underdetermined at " + state_name(j),
                 warnings);
  }
  const Vector d = pinv(t.transpose(), options.tau_rank) * target;
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(dmax > 0.0) || d.cwiseAbs().minCoeff() < options.tau_scale * dmax) {
    fail_or_warn(options.strict, ErrorKind::VanishingScale, "vanishing scale at " + state_name(j), warnings);
  }
  return d.asDiagonal() * Rt;
}

AssembledR assemble_R(const std::vector<Matrix>& scaled, const std::vector<int>& representatives,
                      const CokernelFactorization& fact, bool noisy, const RecoveryOptions& options,
                      std::vector<std::string>* warnings) {
  check_factorization(fact);
  const int r = fact.r;
  const int L = fact.L;
  // The L columns of one R~_j^+ belong to distinct components, so clusters
  // remember which representatives contributed and never absorb a second
  // column from the same one.
  struct Cluster {
    Vector sum;
    int count = 0;
    std::vector<size_t> sources;
  };
  std::vector<Cluster> cols;
  auto cosine = [](const Vector& a, const Vector& b) {
    const double na = a.norm(), nb = b.norm();
    return (na == 0.0 || nb == 0.0) ? 0.0 : std::abs(a.dot(b)) / (na * nb);
  };
  auto shares_source = [](const Cluster& a, const Cluster& b) {
    for (size_t x : a.sources) {
      if (std::find(b.sources.begin(), b.sources.end(), x) != b.sources.end()) return true;
    }
    return false;
  };
  for (size_t src = 0; src < scaled.size(); ++src) {
    const Matrix inv = pinv_rank(scaled[src], L);
    const size_t first_new = cols.size();
    for (int c = 0; c < inv.cols(); ++c) {
      const Vector v = inv.col(c);
      bool dup = false;
      for (size_t q = 0; q < first_new; ++q) {
        auto& k = cols[q];
        if (std::find(k.sources.begin(), k.sources.end(), src) != k.sources.end()) continue;
        if (cosine(k.sum / k.count, v) >= 1.0 - options.tau_dup) {
          k.sources.push_back(src);
          dup = true;
          break;
        }
      }
      if (!dup) cols.push_back({v, 1, {src}});
    }
  }
  if (static_cast<int>(cols.size()) < r) {
    throw Error(ErrorKind::ComponentsNotCovered, "components not covered: found " + std::to_string(cols.size()) +
                                                     " distinct columns, need " + std::to_string(r));
  }
  if (static_cast<int>(cols.size()) > r) {
    if (!noisy && warnings) {
      warnings->push_back("merged " + std::to_string(cols.size() - static_cast<size_t>(r)) +
                          " near-duplicate columns of R^-1");
    }
    // Agglomerative merging of the most similar compatible pair until r
    // columns remain; incompatible pairs are a last resort.
    while (static_cast<int>(cols.size()) > r) {
      size_t ba = 0, bb = 1;
      double best = -2.0;
      for (size_t a = 0; a < cols.size(); ++a) {
        for (size_t b = a + 1; b < cols.size(); ++b) {
          double c = cosine(cols[a].sum, cols[b].sum);
          if (shares_source(cols[a], cols[b])) c -= 1.0;
          if (c > best) {
            best = c;
            ba = a;
            bb = b;
          }
        }
      }
      const double sign = cols[ba].sum.dot(cols[bb].sum) < 0.0 ? -1.0 : 1.0;
      cols[ba].sum += sign * cols[bb].sum;
      cols[ba].count += cols[bb].count;
      cols[ba].sources.insert(cols[ba].sources.end(), cols[bb].sources.begin(), cols[bb].sources.end());
      cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(bb));
    }
  }
  Matrix rinv(r, r);
  for (int q = 0; q < r; ++q) rinv.col(q) = cols[static_cast<size_t>(q)].sum / cols[static_cast<size_t>(q)].count;
  const Vector rs = singular_values(rinv);
  if (rs(0) == 0.0 || rs(r - 1) < options.tau_rank * rs(0)) {
    fail_or_warn(options.strict && !noisy, ErrorKind::ComponentsNotCovered,
                 "components not covered: collected columns are linearly dependent", warnings);
  }
  AssembledR out;
  out.PiR = noisy ? pinv(rinv, options.tau_rank) : Matrix(rinv.inverse());
  if (!out.PiR.allFinite()) out.PiR = pinv(rinv, options.tau_rank);

  for (int rep : representatives) {
    const Matrix m = out.PiR * fact.Yp[static_cast<size_t>(rep)];
    const Vector norms = m.rowwise().norm();
    const double top = norms.maxCoeff();
    std::vector<int> support;
    for (int q = 0; q < r; ++q) {
      if (norms(q) > options.tau_row * top) support.push_back(q);
    }
    if (noisy || static_cast<int>(support.size()) != L) {
      if (!noisy) {
        fail_or_warn(options.strict, ErrorKind::RowSupportMismatch,
                     "row-support mismatch at " + state_name(rep) + ": " + std::to_string(support.size()) +
                         " non-zero rows, expected " + std::to_string(L),
                     warnings);
      }
      std::vector<int> idx(static_cast<size_t>(r));
      std::iota(idx.begin(), idx.end(), 0);
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return norms(a) > norms(b); });
      support.assign(idx.begin(), idx.begin() + std::min(L, r));
      std::sort(support.begin(), support.end());
    }
    out.component_sets.push_back(std::move(support));
  }
  return out;
}

RecoveryReport reconstruct_mixture(const std::vector<int>& assignment, const Matrix& PiR,
                                   const CokernelFactorization& fact, const CompanionshipClasses& classes,
                                   const TrailDistribution& dist, const RecoveryOptions& options) {
  check_factorization(fact);
  const int n = fact.n;
  const int L = fact.L;
  const int r = fact.r;
  if (static_cast<int>(assignment.size()) != r) {
    throw Error(ErrorKind::ShapeMismatch, "reconstruct_mixture: assignment must label all r components");
  }
  RecoveryReport rep;
  rep.classes = classes;
  rep.r_used = r;
  rep.assignment = assignment;

  Matrix start = Matrix::Zero(L, n);
  std::vector<Matrix> P(static_cast<size_t>(n));
  int missing = 0;
  for (int j = 0; j < n; ++j) {
    const Matrix ym = PiR * fact.Yp[static_cast<size_t>(j)];
    const Matrix zm = PiR * fact.Zp[static_cast<size_t>(j)];
    const Vector norms = ym.rowwise().norm();
    Matrix y = Matrix::Zero(L, L);
    Matrix z = Matrix::Zero(L, L);
    for (int l = 0; l < L; ++l) {
      int best = -1;
      for (int q = 0; q < r; ++q) {
        if (assignment[static_cast<size_t>(q)] == l && (best < 0 || norms(q) > norms(best))) best = q;
      }
      if (best < 0) {
        ++missing;
        continue;
      }
      y.row(l) = ym.row(best);
      z.row(l) = zm.row(best);
    }
    const Matrix s = z * y.transpose();
    start.col(j) = s.diagonal();
    P[static_cast<size_t>(j)] = y * fact.Pp[static_cast<size_t>(j)];
  }
  if (missing > 0) rep.warnings.push_back("some chains have no component at " + std::to_string(missing) + " states");

  std::vector<Matrix> chains(static_cast<size_t>(L), Matrix::Zero(n, n));
  const double smax = start.cwiseAbs().maxCoeff();
  int starved = 0;
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < n; ++i) {
      const double si = start(l, i);
      if (!(std::abs(si) > options.tau_start * std::max(smax, 1e-300)) || si < 0.0) {
        chains[static_cast<size_t>(l)].row(i).setConstant(1.0 / n);
        ++starved;
        continue;
      }
      for (int j = 0; j < n; ++j) chains[static_cast<size_t>(l)](i, j) = P[static_cast<size_t>(j)](l, i) / si;
    }
  }
  if (starved > 0) {
    rep.warnings.push_back("starved start: " + std::to_string(starved) + " rows replaced by uniform");
  }
  for (auto& w : sanitize(start, chains)) rep.warnings.push_back(std::move(w));
  rep.mixture = Mixture(std::move(start), std::move(chains));
  rep.residual_trail_error = trail_error(dist, exact_trail_distribution(rep.mixture));
  return rep;
}

namespace {

std::string stage_message(const std::string& stage, const Error& e) { return stage + ": " + e.what(); }

RecoveryReport run_once(const CokernelFactorization& fact, const TrailDistribution& dist,
                        const CompanionshipClasses& classes, bool noisy, const RecoveryOptions& options) {
  std::vector<std::string> warnings;
  RecoveryOptions opts = options;
  opts.strict = options.strict && !noisy;
  std::vector<Matrix> scaled;
  const size_t k = classes.representatives.size();
  for (size_t c = 0; c < k; ++c) {
    const int j = classes.representatives[c];
    const int i = classes.companions[c];
    Matrix rt;
    try {
      rt = eigendecompose_pair(j, i, fact, opts, &warnings);
    } catch (const Error& e) {
      throw Error(e.kind(), stage_message("eigendecomposition", e));
    }
    try {
      scaled.push_back(fix_scaling(j, rt, fact, dist, opts, &warnings));
    } catch (const Error& e) {
      throw Error(e.kind(), stage_message("scaling", e));
    }
  }
  AssembledR assembled;
  try {
    assembled = assemble_R(scaled, classes.representatives, fact, noisy, opts, &warnings);
  } catch (const Error& e) {
    throw Error(e.kind(), stage_message("merging", e));
  }
  std::vector<int> labels;
  if (fact.r == fact.L && classes.representatives.size() == 1) {
    labels.resize(static_cast<size_t>(fact.r));
    std::iota(labels.begin(), labels.end(), 0);
  } else if (noisy) {
    labels = label_assignment(assembled.component_sets, fact.r, fact.L, AssignmentMode::LeastOverlap);
  } else {
    try {
      labels = label_assignment(assembled.component_sets, fact.r, fact.L, AssignmentMode::Exact);
    } catch (const Error& e) {
      if (opts.strict) throw Error(e.kind(), stage_message("assignment", e));
      warnings.emplace_back(e.what());
      labels = label_assignment(assembled.component_sets, fact.r, fact.L, AssignmentMode::LeastOverlap);
    }
  }
  RecoveryReport rep = reconstruct_mixture(labels, assembled.PiR, fact, classes, dist, opts);
  rep.component_sets = assembled.component_sets;
  rep.noisy = noisy;
  warnings.insert(warnings.end(), rep.warnings.begin(), rep.warnings.end());
  rep.warnings = std::move(warnings);
  return rep;
}

}  // namespace

RecoveryReport recover_from_factorization(const CokernelFactorization& fact, const TrailDistribution& dist,
                                          const RecoveryOptions& options) {
  check_factorization(fact);
  const bool noisy = resolve_noisy(options, dist);
  const double threshold = options.companion_threshold >= 0.0
                               ? options.companion_threshold
                               : (use_subspace(options, noisy) ? kSubspaceCompanionThreshold
                                                               : kExactCompanionThreshold);
  CompanionshipClasses classes;
  try {
    classes = companionship_classes(fact, threshold, dist, options);
  } catch (const Error& e) {
    throw Error(e.kind(), stage_message("companionship", e));
  }
  const int reps = options.repetitions > 0 ? options.repetitions : (noisy ? 5 : 1);

  std::optional<RecoveryReport> best;
  std::optional<Error> first_error;
  for (int t = 0; t < reps; ++t) {
    CompanionshipClasses pick = classes;
    if (t > 0) {
      std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                        static_cast<std::uint32_t>(t)};
      std::mt19937_64 rng(seq);
      for (size_t c = 0; c < pick.classes.size(); ++c) {
        const auto& members = pick.classes[c];
        std::uniform_int_distribution<size_t> u(0, members.size() - 1);
        const size_t a = u(rng);
        size_t b = u(rng);
        while (b == a) b = u(rng);
        pick.representatives[c] = members[a];
        pick.companions[c] = members[b];
      }
    }
    try {
      RecoveryReport rep = run_once(fact, dist, pick, noisy, options);
      rep.classes = classes;
      rep.repetition = t;
      for (const auto& w : fact.warnings) rep.warnings.push_back(w);
      if (!best || rep.residual_trail_error < best->residual_trail_error) best = std::move(rep);
    } catch (const Error& e) {
      if (!first_error) first_error = e;
    }
  }
  if (!best) throw *first_error;
  return std::move(*best);
}

RecoveryReport ca_svd(const TrailDistribution& dist, int L, std::optional<int> r, const RecoveryOptions& options) {
  CokernelFactorization fact = svd_factor(dist, L);
  const bool noisy = resolve_noisy(options, dist);
  if (r) {
    attach_cokernel(fact, r, options.tau_ker);
  } else if (!noisy) {
    try {
      attach_cokernel(fact, std::nullopt, options.tau_ker);
    } catch (const Error& e) {
      throw Error(e.kind(), stage_message("co-kernel", e));
    }
  } else {
    const Matrix a = factor_shuffle_matrix(fact);
    const LeftSpectrum spec = left_spectrum(a);
    const RankEstimate est = choose_r(spec.sigma, L, fact.n);
    for (const auto& w : est.warnings) fact.warnings.push_back(w);
    fact.cokernel_svals = spec.sigma;
    attach_rows(fact, basis_rows(spec, est.r_hat));
  }
  return recover_from_factorization(fact, dist, options);
}

RecoveryReport gkv_svd(const TrailDistribution& dist, int L, const RecoveryOptions& options) {
  CokernelFactorization fact = svd_factor(dist, L);
  attach_cokernel(fact, L, options.tau_ker);
  const bool noisy = resolve_noisy(options, dist);
  RecoveryOptions opts = options;
  opts.strict = false;

  CompanionshipClasses classes;
  const int n = fact.n;
  classes.classes.push_back({});
  for (int j = 0; j < n; ++j) classes.classes[0].push_back(j);
  classes.scores = Matrix::Zero(n, n);
  int best = 1;
  double best_sep = -1.0;
  for (int i = 1; i < n; ++i) {
    const double sep = eigen_separation(0, i, fact);
    if (sep > best_sep) {
      best_sep = sep;
      best = i;
    }
  }
  classes.representatives.push_back(0);
  classes.companions.push_back(best);
  RecoveryReport rep = run_once(fact, dist, classes, noisy, opts);
  for (const auto& w : fact.warnings) rep.warnings.push_back(w);
  return rep;
}

}  // namespace mcmix
