#include <random>

#include <doctest.h>

#include "../support/fixtures.hpp"
#include "mcmix/em.hpp"
#include "mcmix/error.hpp"
#include "mcmix/evaluation.hpp"
#include "mcmix/sampling.hpp"
#include "mcmix/trail_distribution.hpp"

using namespace mcmix;

TEST_SUITE("em-refinement") {

TEST_CASE("log-likelihood never decreases") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 5; ++t) {
    const auto mix = fixtures::random_dense(6, 2, rng);
    const auto d = sample_distribution(mix, 50000, static_cast<std::uint64_t>(t));
    EmConfig cfg;
    cfg.max_iters = 40;
    cfg.tol = 0.0;
    cfg.seed = static_cast<std::uint64_t>(t);
    const auto res = em_fit(d, 2, cfg);
    REQUIRE(res.loglik_trace.size() >= 2);
    for (size_t k = 1; k < res.loglik_trace.size(); ++k) {
      CHECK(res.loglik_trace[k] >= res.loglik_trace[k - 1] - 1e-9 * std::abs(res.loglik_trace[k - 1]));
    }
    CHECK(res.mixture.is_valid(1e-9));
  }
}

TEST_CASE("one chain: a single step gives the maximum-likelihood chain") {
  std::mt19937_64 rng(2);
  const auto mix = fixtures::random_dense(5, 1, rng);
  const auto d = sample_distribution(mix, 20000, 3);
  // Transition counts from both positions of every trail.
  Matrix N = Matrix::Zero(5, 5);
  Vector first = Vector::Zero(5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      for (int k = 0; k < 5; ++k) {
        const double p = d(i, j, k);
        N(i, j) += p;
        N(j, k) += p;
        first(i) += p;
      }
    }
  }
  EmConfig cfg;
  cfg.max_iters = 1;
  cfg.smoothing = 0.0;
  cfg.warm = Mixture(Matrix::Constant(1, 5, 0.2), {Matrix::Constant(5, 5, 0.2)});
  const auto res = em_fit(d, 1, cfg);
  for (int i = 0; i < 5; ++i) {
    CHECK(res.mixture.s(0, i) == doctest::Approx(first(i)).epsilon(1e-12));
    for (int j = 0; j < 5; ++j) {
      CHECK(res.mixture.M(0, i, j) == doctest::Approx(N(i, j) / N.row(i).sum()).epsilon(1e-12));
    }
  }
}

TEST_CASE("the true mixture is a fixed point on exact input") {
  std::mt19937_64 rng(3);
  const auto mix = fixtures::random_dense(5, 2, rng);
  const auto d = exact_trail_distribution(mix);
  EmConfig cfg;
  cfg.max_iters = 5;
  cfg.warm = mix;
  const auto res = em_fit(d, 2, cfg);
  CHECK((res.mixture.start() - mix.start()).cwiseAbs().maxCoeff() < 1e-12);
  for (int l = 0; l < 2; ++l) CHECK((res.mixture.chain(l) - mix.chain(l)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("refine with zero iterations returns the seed") {
  std::mt19937_64 rng(4);
  const auto mix = fixtures::random_dense(4, 2, rng);
  const auto out = refine(exact_trail_distribution(fixtures::random_dense(4, 2, rng)), mix, 0);
  CHECK(out.start() == mix.start());
  for (int l = 0; l < 2; ++l) CHECK(out.chain(l) == mix.chain(l));
}

TEST_CASE("relabelled warm start gives relabelled output") {
  std::mt19937_64 rng(5);
  const auto truth = fixtures::random_dense(5, 3, rng);
  const auto warm = fixtures::random_dense(5, 3, rng);
  const auto d = sample_distribution(truth, 20000, 6);
  const std::vector<int> perm{2, 0, 1};
  EmConfig a;
  a.max_iters = 10;
  a.warm = warm;
  EmConfig b = a;
  b.warm = warm.permuted(perm);
  const auto ra = em_fit(d, 3, a);
  const auto rb = em_fit(d, 3, b);
  for (int l = 0; l < 3; ++l) {
    CHECK((rb.mixture.chain(l) - ra.mixture.chain(perm[l])).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((rb.mixture.start().row(l) - ra.mixture.start().row(perm[l])).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("improved fit from a random start") {
  std::mt19937_64 rng(7);
  const auto truth = fixtures::random_dense(6, 2, rng);
  const auto d = exact_trail_distribution(truth);
  EmConfig cfg;
  cfg.max_iters = 200;
  const auto res = em_fit(d, 2, cfg);
  CHECK(res.loglik_trace.back() > res.loglik_trace.front());
  CHECK(trail_error(d, exact_trail_distribution(res.mixture)) < 0.05);
}

TEST_CASE("bad arguments") {
  const auto d = exact_trail_distribution(fixtures::worked_example());
  CHECK_THROWS_AS(em_fit(d, 0), Error);
  EmConfig cfg;
  cfg.warm = Mixture(Matrix::Constant(1, 4, 0.25), {Matrix::Constant(4, 4, 0.25)});
  CHECK_THROWS_AS(em_fit(d, 2, cfg), Error);
}

}
