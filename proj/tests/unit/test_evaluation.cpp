#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <doctest.h>

#include "../support/fixtures.hpp"
#include "mcmix/error.hpp"
#include "mcmix/evaluation.hpp"
#include "mcmix/sampling.hpp"
#include "mcmix/trail_distribution.hpp"

using namespace mcmix;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index k = 0;
  for (double x : xs) v(k++) = x;
  return v;
}

Matrix random_cost(int L, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix c(L, L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) c(a, b) = u(rng);
  return c;
}

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("total variation") {
  CHECK(tv_distance(vec({0.3, 0.7}), vec({0.3, 0.7})) == 0.0);
  CHECK(tv_distance(vec({1, 0}), vec({0, 1})) == 1.0);
  CHECK(tv_distance(vec({0.6, 0.4}), vec({0.5, 0.5})) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK_THROWS_AS(tv_distance(vec({1}), vec({0.5, 0.5})), Error);
}

TEST_CASE("hungarian small cases") {
  Matrix id(2, 2), sw(2, 2);
  id << 0, 1, 1, 0;
  sw << 1, 0, 0, 1;
  const auto a = hungarian(id);
  CHECK(a.permutation == std::vector<int>{0, 1});
  CHECK(a.cost == 0.0);
  const auto b = hungarian(sw);
  CHECK(b.permutation == std::vector<int>{1, 0});
  CHECK(b.cost == 0.0);
  // All-equal costs: lexicographically first permutation.
  CHECK(hungarian(Matrix::Ones(4, 4)).permutation == std::vector<int>{0, 1, 2, 3});
  Matrix bad = Matrix::Zero(2, 2);
  bad(0, 1) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(hungarian(bad), Error);
}

TEST_CASE("hungarian matches brute force") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const int L = 1 + t % 6;
    const Matrix c = random_cost(L, rng);
    const auto h = hungarian(c);
    const auto bf = fixtures::brute_force_match(c);
    CHECK(h.cost == doctest::Approx(bf.cost).epsilon(1e-12));
    CHECK(h.permutation == bf.perm);
  }
}

TEST_CASE("hungarian beats every explicit permutation") {
  std::mt19937_64 rng(2);
  const Matrix c = random_cost(12, rng);
  const auto h = hungarian(c);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  for (int t = 0; t < 100; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    double total = 0.0;
    for (int a = 0; a < 12; ++a) total += c(a, perm[a]);
    CHECK(h.cost <= total + 1e-12);
  }
}

TEST_CASE("recovery error invariances") {
  std::mt19937_64 rng(3);
  const auto m = fixtures::random_dense(5, 3, rng);
  const auto n = fixtures::random_dense(5, 3, rng);
  CHECK(recovery_error(m, m).value == 0.0);
  const std::vector<int> cyc{1, 2, 0};
  const auto shifted = recovery_error(m, m.permuted(cyc));
  CHECK(shifted.value == 0.0);
  CHECK(shifted.match.permutation == std::vector<int>{2, 0, 1});
  const double mn = recovery_error(m, n).value;
  CHECK(recovery_error(n, m).value == doctest::Approx(mn).epsilon(1e-12));
  CHECK(recovery_error(m.permuted(cyc), n).value == doctest::Approx(mn).epsilon(1e-12));
  CHECK(recovery_error(m, n.permuted(cyc)).value == doctest::Approx(mn).epsilon(1e-12));
  // Value is (1/2Ln) times the best sum of per-row TV distances.
  Matrix cost(3, 3);
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      double c = 0.0;
      for (int i = 0; i < 5; ++i) c += fixtures::tv(m.chain(a).row(i).transpose(), n.chain(b).row(i).transpose());
      cost(a, b) = c;
    }
  }
  CHECK(mn == doctest::Approx(fixtures::brute_force_match(cost).cost / 30.0).epsilon(1e-12));
  const Mixture small(Matrix::Constant(1, 5, 0.2), {Matrix::Constant(5, 5, 0.2)});
  CHECK_THROWS_AS(recovery_error(m, small), Error);
}

TEST_CASE("trail error") {
  std::mt19937_64 rng(4);
  const auto a = exact_trail_distribution(fixtures::random_dense(4, 2, rng));
  const auto b = exact_trail_distribution(fixtures::random_dense(4, 2, rng));
  const auto c = exact_trail_distribution(fixtures::random_dense(4, 2, rng));
  CHECK(trail_error(a, a) == 0.0);
  CHECK(trail_error(a, b) == doctest::Approx(trail_error(b, a)));
  CHECK(trail_error(a, c) <= trail_error(a, b) + trail_error(b, c) + 1e-15);
  // Deterministic loops on disjoint states.
  Matrix s1 = Matrix::Zero(1, 2), s2 = Matrix::Zero(1, 2);
  s1(0, 0) = 1.0;
  s2(0, 1) = 1.0;
  const Mixture x(s1, {Matrix::Identity(2, 2)});
  const Mixture y(s2, {Matrix::Identity(2, 2)});
  CHECK(trail_error(exact_trail_distribution(x), exact_trail_distribution(y)) == 1.0);
  CHECK_THROWS_AS(trail_error(a, exact_trail_distribution(x)), Error);
}

TEST_CASE("empirical trail error shrinks with more samples") {
  std::mt19937_64 rng(5);
  const auto mix = fixtures::random_dense(20, 3, rng);
  const auto exact = exact_trail_distribution(mix);
  const double e4 = trail_error(exact, sample_distribution(mix, 10000, 1));
  const double e6 = trail_error(exact, sample_distribution(mix, 1000000, 1));
  CHECK(e6 > 0.0);
  CHECK(e6 < e4);
}

}
