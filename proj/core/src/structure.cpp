#include "mcmix/structure.hpp"

#include <cmath>
#include <numeric>

#include "mcmix/error.hpp"
#include "mcmix/linalg.hpp"

namespace mcmix {
namespace {

struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int size) : parent(static_cast<size_t>(size)) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<size_t>(x)] != x) {
      parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
      x = parent[static_cast<size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a > b) std::swap(a, b);
    parent[static_cast<size_t>(b)] = a;
  }
};

}  // namespace

bool ComponentStructure::companion_connected() const {
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < L; ++l) {
      if (plus_comp[static_cast<size_t>(l)][static_cast<size_t>(j)] !=
          minus_comp[static_cast<size_t>(l)][static_cast<size_t>(j)]) {
        return false;
      }
    }
    bool found = false;
    for (int i = 0; i < n && !found; ++i) {
      if (i == j) continue;
      bool all = true;
      for (int l = 0; l < L && all; ++l) {
        all = minus_comp[static_cast<size_t>(l)][static_cast<size_t>(i)] ==
              plus_comp[static_cast<size_t>(l)][static_cast<size_t>(j)];
      }
      found = all;
    }
    if (!found) return false;
  }
  return true;
}

ComponentStructure component_structure(const Mixture& mixture, double tau_edge) {
  const int n = mixture.n();
  const int L = mixture.L();
  ComponentStructure cs;
  cs.n = n;
  cs.L = L;
  cs.plus_comp.assign(static_cast<size_t>(L), std::vector<int>(static_cast<size_t>(n), -1));
  cs.minus_comp.assign(static_cast<size_t>(L), std::vector<int>(static_cast<size_t>(n), -1));
  // Vertex v < n is v+, vertex n + v is v-.
  for (int l = 0; l < L; ++l) {
    DisjointSet ds(2 * n);
    const Matrix& m = mixture.chain(l);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (m(i, j) > tau_edge) ds.unite(i, n + j);
      }
    }
    std::vector<int> label(static_cast<size_t>(2 * n), -1);
    for (int v = 0; v < 2 * n; ++v) {
      const int root = ds.find(v);
      if (label[static_cast<size_t>(root)] < 0) {
        label[static_cast<size_t>(root)] = static_cast<int>(cs.components.size());
        cs.components.push_back(Component{l, {}, {}});
      }
      const int q = label[static_cast<size_t>(root)];
      auto& comp = cs.components[static_cast<size_t>(q)];
      if (v < n) {
        comp.plus.push_back(v);
        cs.plus_comp[static_cast<size_t>(l)][static_cast<size_t>(v)] = q;
      } else {
        comp.minus.push_back(v - n);
        cs.minus_comp[static_cast<size_t>(l)][static_cast<size_t>(v - n)] = q;
      }
    }
  }
  cs.r = static_cast<int>(cs.components.size());
  cs.xi = Matrix::Zero(cs.r, 2 * L * n);
  cs.Xi.assign(static_cast<size_t>(n), Matrix::Zero(cs.r, L));
  for (int q = 0; q < cs.r; ++q) {
    const auto& comp = cs.components[static_cast<size_t>(q)];
    for (int j : comp.plus) cs.xi(q, j * L + comp.chain) = 1.0;
    for (int j : comp.minus) cs.xi(q, L * n + j * L + comp.chain) = 1.0;
  }
  for (int j = 0; j < n; ++j) {
    for (int l = 0; l < L; ++l) {
      const int qp = cs.plus_comp[static_cast<size_t>(l)][static_cast<size_t>(j)];
      if (qp == cs.minus_comp[static_cast<size_t>(l)][static_cast<size_t>(j)]) {
        cs.Xi[static_cast<size_t>(j)](qp, l) = 1.0;
      }
    }
  }
  return cs;
}

GroundTruthFactors ground_truth_factors(const Mixture& mixture) {
  const int n = mixture.n();
  const int L = mixture.L();
  GroundTruthFactors f;
  f.P.assign(static_cast<size_t>(n), Matrix::Zero(L, n));
  f.Q.assign(static_cast<size_t>(n), Matrix::Zero(L, n));
  f.S.assign(static_cast<size_t>(n), Matrix::Zero(L, L));
  f.Mplus.assign(static_cast<size_t>(n), Matrix::Zero(L, n));
  for (int j = 0; j < n; ++j) {
    auto& P = f.P[static_cast<size_t>(j)];
    auto& Q = f.Q[static_cast<size_t>(j)];
    auto& Mp = f.Mplus[static_cast<size_t>(j)];
    for (int l = 0; l < L; ++l) {
      f.S[static_cast<size_t>(j)](l, l) = mixture.s(l, j);
      for (int i = 0; i < n; ++i) {
        P(l, i) = mixture.s(l, i) * mixture.M(l, i, j);
        Q(l, i) = mixture.s(l, j) * mixture.M(l, j, i);
        Mp(l, i) = mixture.M(l, j, i);
      }
    }
  }
  return f;
}

Matrix build_shuffle_matrix(const std::vector<Matrix>& P, const std::vector<Matrix>& Q) {
  const int n = static_cast<int>(P.size());
  if (n == 0 || Q.size() != P.size()) {
    throw Error(ErrorKind::ShapeMismatch, "shuffle matrix: need n factors P_j and n factors Q_j");
  }
  const int L = static_cast<int>(P[0].rows());
  for (int j = 0; j < n; ++j) {
    const auto& p = P[static_cast<size_t>(j)];
    const auto& q = Q[static_cast<size_t>(j)];
    if (p.rows() != L || q.rows() != L || p.cols() != n || q.cols() != n) {
      throw Error(ErrorKind::ShapeMismatch, "shuffle matrix: factor of state " + std::to_string(j + 1) +
                                                " is not L x n");
    }
  }
  Matrix a = Matrix::Zero(2 * L * n, n * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int col = i * n + j;
      for (int l = 0; l < L; ++l) {
        a(j * L + l, col) = P[static_cast<size_t>(j)](l, i);
        a(L * n + i * L + l, col) = -Q[static_cast<size_t>(i)](l, j);
      }
    }
  }
  return a;
}

RecoverabilityReport verify_recoverability(const Mixture& mixture, double tol, double ratio_tol,
                                           double tau_edge) {
  const int n = mixture.n();
  const int L = mixture.L();
  RecoverabilityReport rep;
  const ComponentStructure cs = component_structure(mixture, tau_edge);
  rep.r = cs.r;
  rep.companion_connected = cs.companion_connected();

  const GroundTruthFactors f = ground_truth_factors(mixture);
  const LeftSpectrum spec = left_spectrum(build_shuffle_matrix(f.P, f.Q));
  const double cut = tol * (spec.sigma.size() > 0 ? spec.sigma(0) : 0.0);
  int rank = 0;
  for (Eigen::Index i = 0; i < spec.sigma.size(); ++i) {
    if (spec.sigma(i) > cut) ++rank;
  }
  rep.cokernel_dim = 2 * L * n - rank;
  rep.cokernel_dim_equals_r = rep.cokernel_dim == cs.r;

  bool zero_start = false;
  for (int l = 0; l < L; ++l) {
    for (int j = 0; j < n; ++j) zero_start = zero_start || !(mixture.s(l, j) > 0.0);
  }
  if (zero_start) {
    rep.ratios_distinct = false;
    rep.notes.emplace_back("zero start");
  } else {
    rep.ratios_distinct = true;
    for (int i = 0; i < n && rep.ratios_distinct; ++i) {
      for (int j = i + 1; j < n && rep.ratios_distinct; ++j) {
        for (int a = 0; a < L && rep.ratios_distinct; ++a) {
          for (int b = a + 1; b < L; ++b) {
            const double x = mixture.s(a, i) / mixture.s(a, j);
            const double y = mixture.s(b, i) / mixture.s(b, j);
            if (std::abs(x - y) <= ratio_tol * std::max(std::abs(x), std::abs(y))) {
              rep.ratios_distinct = false;
              rep.notes.push_back("equal start ratios for states " + std::to_string(i + 1) + " and " +
                                  std::to_string(j + 1));
              break;
            }
          }
        }
      }
    }
  }
  if (!rep.companion_connected) rep.notes.emplace_back("not companion-connected");
  if (!rep.cokernel_dim_equals_r) {
    rep.notes.push_back("co-kernel dimension " + std::to_string(rep.cokernel_dim) + " differs from r = " +
                        std::to_string(cs.r));
  }
  return rep;
}

}  // namespace mcmix
