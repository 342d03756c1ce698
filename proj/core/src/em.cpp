#include "mcmix/em.hpp"

#include <cmath>
#include <random>

#include "mcmix/error.hpp"
#include "mcmix/generator.hpp"

namespace mcmix {
namespace {

struct WeightedTrail {
  int i, j, k;
  double w;
};

struct Counts {
  Matrix start;
  std::vector<Matrix> trans;
};

// One E-step pass: returns the log-likelihood of the current parameters and,
// when counts is given, the expected sufficient statistics.
double e_step(const std::vector<WeightedTrail>& trails, const Matrix& start, const std::vector<Matrix>& chains,
              Counts* counts, long* skipped) {
  const auto L = static_cast<int>(chains.size());
  double ll = 0.0;
  std::vector<double> a(static_cast<size_t>(L));
  for (const auto& t : trails) {
    double p = 0.0;
    for (int l = 0; l < L; ++l) {
      const Matrix& m = chains[static_cast<size_t>(l)];
      a[static_cast<size_t>(l)] = start(l, t.i) * m(t.i, t.j) * m(t.j, t.k);
      p += a[static_cast<size_t>(l)];
    }
    if (!(p > 0.0)) {
      if (skipped) ++*skipped;
      continue;
    }
    ll += t.w * std::log(p);
    if (!counts) continue;
    for (int l = 0; l < L; ++l) {
      const double g = t.w * a[static_cast<size_t>(l)] / p;
      counts->start(l, t.i) += g;
      counts->trans[static_cast<size_t>(l)](t.i, t.j) += g;
      counts->trans[static_cast<size_t>(l)](t.j, t.k) += g;
    }
  }
  return ll;
}

void m_step(const Counts& c, double alpha, Matrix& start, std::vector<Matrix>& chains) {
  const double total = c.start.sum();
  if (total > 0.0) start = c.start / total;
  for (size_t l = 0; l < chains.size(); ++l) {
    const Matrix& t = c.trans[l];
    const auto n = t.cols();
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      const double row = t.row(i).sum() + static_cast<double>(n) * alpha;
      if (!(row > 0.0)) continue;  // no evidence: keep the previous row
      chains[l].row(i) = (t.row(i).array() + alpha) / row;
    }
  }
}

}  // namespace

EmResult em_fit(const TrailDistribution& dist, int L, const EmConfig& cfg) {
  const int n = dist.n();
  if (L < 1) throw Error(ErrorKind::InvalidArgument, "em: L must be positive");
  if (cfg.max_iters < 0 || cfg.tol < 0.0) throw Error(ErrorKind::InvalidArgument, "em: invalid configuration");
  std::vector<WeightedTrail> trails;
  dist.for_each([&](const Trail& t, double p) { trails.push_back({t.i, t.j, t.k, p}); });
  if (trails.empty()) throw Error(ErrorKind::NoTrails, "no trails");

  Matrix start;
  std::vector<Matrix> chains;
  if (cfg.warm) {
    if (cfg.warm->n() != n || cfg.warm->L() != L) {
      throw Error(ErrorKind::ShapeMismatch, "em: warm start does not match n and L");
    }
    start = cfg.warm->start();
    chains = cfg.warm->chains();
  } else {
    std::mt19937_64 rng(cfg.seed);
    Mixture init = random_mixture(n, L, rng);
    start = init.start();
    chains = init.chains();
  }
  const double alpha = cfg.smoothing >= 0.0 ? cfg.smoothing : (dist.is_exact() ? 0.0 : 1e-9);

  EmResult res;
  long skipped = 0;
  Counts counts;
  auto reset = [&] {
    counts.start = Matrix::Zero(L, n);
    counts.trans.assign(static_cast<size_t>(L), Matrix::Zero(n, n));
  };
  reset();
  double ll = e_step(trails, start, chains, &counts, &skipped);
  res.loglik_trace.push_back(ll);
  // A likelihood that skipped trails is not comparable with the next one, so
  // the stopping rule only applies between fully supported iterates.
  bool comparable = skipped == 0;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    m_step(counts, alpha, start, chains);
    reset();
    long now_skipped = 0;
    const double next = e_step(trails, start, chains, &counts, &now_skipped);
    res.loglik_trace.push_back(next);
    res.iterations = it;
    const double gain = next - ll;
    ll = next;
    const bool stop = comparable && gain < cfg.tol * std::abs(ll);
    comparable = now_skipped == 0;
    if (stop) break;
  }
  if (skipped > 0) {
    res.warnings.push_back(std::to_string(skipped) + " trails have zero model probability and were skipped");
  }
  res.mixture = Mixture(std::move(start), std::move(chains));
  return res;
}

Mixture refine(const TrailDistribution& dist, const Mixture& seed, int iters) {
  if (iters <= 0) return seed;
  EmConfig cfg;
  cfg.max_iters = iters;
  cfg.tol = 0.0;
  cfg.warm = seed;
  return em_fit(dist, seed.L(), cfg).mixture;
}

}  // namespace mcmix
