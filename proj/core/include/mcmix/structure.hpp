#pragma once

#include <string>
#include <vector>

#include "mcmix/mixture.hpp"

namespace mcmix {

// One connected component of the bipartite graph G^l on {j+, j-}. plus and
// minus list the states whose j+ / j- copy lies in the component.
struct Component {
  int chain = 0;
  std::vector<int> plus;
  std::vector<int> minus;
};

struct ComponentStructure {
  int n = 0;
  int L = 0;
  int r = 0;
  // Components ordered by chain, then by their smallest vertex (j+ before j-).
  std::vector<Component> components;
  // plus_comp[l][j] / minus_comp[l][j]: component index of j+ / j- in G^l.
  std::vector<std::vector<int>> plus_comp;
  std::vector<std::vector<int>> minus_comp;
  // Row q is the indicator xi_q of component q, in shuffle-matrix row order.
  Matrix xi;
  // Xi[j](q, l) = 1 iff component q belongs to chain l and holds both j+ and j-.
  std::vector<Matrix> Xi;

  // Every j+ shares its component with j- and, for some i != j, with i- in
  // every chain.
  bool companion_connected() const;
};

// Edge {i+, j-} is in G^l iff M^l_ij > tau_edge.
ComponentStructure component_structure(const Mixture& mixture, double tau_edge = 1e-12);

struct GroundTruthFactors {
  std::vector<Matrix> P;      // P_j(l, i) = s^l_i M^l_ij
  std::vector<Matrix> Q;      // Q_j(l, k) = s^l_j M^l_jk
  std::vector<Matrix> S;      // diag(s^l_j)
  std::vector<Matrix> Mplus;  // Mplus_j(l, k) = M^l_jk
};

GroundTruthFactors ground_truth_factors(const Mixture& mixture);

// Rows: (j, l, +) at j * L + l, then (i, l, -) at L * n + i * L + l.
// Columns: (i, j) at i * n + j.
// A[(j,l,+),(i,j)] = P_j(l,i) and A[(i,l,-),(i,j)] = -Q_i(l,j).
Matrix build_shuffle_matrix(const std::vector<Matrix>& P, const std::vector<Matrix>& Q);

struct RecoverabilityReport {
  bool companion_connected = false;
  bool cokernel_dim_equals_r = false;
  bool ratios_distinct = false;
  int r = 0;
  int cokernel_dim = 0;
  std::vector<std::string> notes;

  bool recoverable() const { return companion_connected && cokernel_dim_equals_r && ratios_distinct; }
};

// tol is the relative singular-value cutoff for the co-kernel dimension of
// the ground-truth shuffle matrix. Ratios s^l_i / s^l_j closer than
// ratio_tol (relative) count as equal.
RecoverabilityReport verify_recoverability(const Mixture& mixture, double tol = 1e-9,
                                           double ratio_tol = 1e-6, double tau_edge = 1e-12);

}  // namespace mcmix
