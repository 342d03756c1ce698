#include "mcmix/evaluation.hpp"

#include <cmath>
#include <limits>

#include "mcmix/error.hpp"

namespace mcmix {
namespace {

// Shortest augmenting path with potentials, O(L^3). Returns row -> column.
std::vector<int> solve_assignment(const Matrix& c) {
  const int n = static_cast<int>(c.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<size_t>(n + 1), 0.0), v(static_cast<size_t>(n + 1), 0.0);
  std::vector<int> p(static_cast<size_t>(n + 1), 0), way(static_cast<size_t>(n + 1), 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<size_t>(n + 1), inf);
    std::vector<char> used(static_cast<size_t>(n + 1), 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      const int i0 = p[static_cast<size_t>(j0)];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        const double cur = c(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assign(static_cast<size_t>(n), -1);
  for (int j = 1; j <= n; ++j) assign[static_cast<size_t>(p[static_cast<size_t>(j)] - 1)] = j - 1;
  return assign;
}

double matched_total(const Matrix& c, const std::vector<int>& perm) {
  double t = 0.0;
  for (int i = 0; i < static_cast<int>(perm.size()); ++i) t += c(i, perm[static_cast<size_t>(i)]);
  return t;
}

}  // namespace

double tv_distance(const Vector& p, const Vector& q) {
  if (p.size() != q.size()) throw Error(ErrorKind::ShapeMismatch, "tv_distance: length mismatch");
  return 0.5 * (p - q).cwiseAbs().sum();
}

MatchResult hungarian(const Matrix& cost) {
  if (cost.rows() != cost.cols()) throw Error(ErrorKind::ShapeMismatch, "hungarian: cost matrix must be square");
  if (!cost.allFinite()) throw Error(ErrorKind::InvalidArgument, "hungarian: non-finite cost entry");
  const int n = static_cast<int>(cost.rows());
  MatchResult res;
  if (n == 0) return res;
  const double optimum = matched_total(cost, solve_assignment(cost));
  const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const double slack = 1e-12 * scale * n;

  // Fix rows one at a time to the smallest column that still admits an
  // optimal completion; this yields the lexicographically first optimum.
  const double big = 4.0 * scale * (n + 1);
  Matrix work = cost;
  std::vector<int> perm(static_cast<size_t>(n), -1);
  std::vector<char> taken(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (taken[static_cast<size_t>(j)]) continue;
      Matrix trial = work;
      for (int k = 0; k < n; ++k) {
        if (k != j) trial(i, k) = big;
      }
      const double total = matched_total(trial, solve_assignment(trial));
      if (total <= optimum + slack) {
        perm[static_cast<size_t>(i)] = j;
        taken[static_cast<size_t>(j)] = 1;
        work = trial;
        break;
      }
    }
  }
  res.permutation = perm;
  res.cost = 0.0;
  res.per_chain_tv.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    res.per_chain_tv[static_cast<size_t>(i)] = cost(i, perm[static_cast<size_t>(i)]);
    res.cost += res.per_chain_tv[static_cast<size_t>(i)];
  }
  return res;
}

RecoveryError recovery_error(const Mixture& truth, const Mixture& learned) {
  if (truth.n() != learned.n() || truth.L() != learned.L()) {
    throw Error(ErrorKind::ShapeMismatch, "recovery_error: mixtures differ in n or L");
  }
  const int n = truth.n();
  const int L = truth.L();
  Matrix c(L, L);
  for (int a = 0; a < L; ++a) {
    for (int b = 0; b < L; ++b) {
      double total = 0.0;
      for (int i = 0; i < n; ++i) {
        total += 0.5 * (truth.chain(a).row(i) - learned.chain(b).row(i)).cwiseAbs().sum();
      }
      c(a, b) = total;
    }
  }
  RecoveryError out;
  out.match = hungarian(c);
  out.value = out.match.cost / (2.0 * L * n);
  double st = 0.0;
  for (int a = 0; a < L; ++a) {
    st += (truth.start().row(a) - learned.start().row(out.match.permutation[static_cast<size_t>(a)]))
              .cwiseAbs()
              .sum();
  }
  out.start_tv = 0.5 * st;
  return out;
}

double trail_error(const TrailDistribution& p, const TrailDistribution& q) {
  if (p.n() != q.n()) throw Error(ErrorKind::ShapeMismatch, "trail_error: distributions differ in n");
  const auto a = p.support();
  const auto b = q.support();
  // Both supports are in index order, so a merge walk covers the union.
  double total = 0.0;
  size_t x = 0, y = 0;
  while (x < a.size() || y < b.size()) {
    if (y == b.size() || (x < a.size() && a[x].first < b[y].first)) {
      total += a[x++].second;
    } else if (x == a.size() || b[y].first < a[x].first) {
      total += b[y++].second;
    } else {
      total += std::abs(a[x++].second - b[y++].second);
    }
  }
  return 0.5 * total;
}

}  // namespace mcmix
