#include <cstdlib>
#include <random>

#include <doctest.h>

#include "../support/fixtures.hpp"
#include "mcmix/error.hpp"
#include "mcmix/evaluation.hpp"
#include "mcmix/generator.hpp"
#include "mcmix/linalg.hpp"
#include "mcmix/sampling.hpp"
#include "mcmix/structure.hpp"
#include "mcmix/trail_distribution.hpp"

using namespace mcmix;

TEST_SUITE("core-model") {

TEST_CASE("mixture validation rejects non-stochastic input") {
  Matrix bad = Matrix::Constant(2, 2, 0.5);
  bad(0, 0) = 0.7;
  CHECK_THROWS_AS(Mixture(Matrix::Constant(1, 2, 0.5), {bad}).validate(), Error);
  CHECK_THROWS_AS(Mixture(Matrix::Constant(1, 2, 0.4), {Matrix::Constant(2, 2, 0.5)}).validate(), Error);
  CHECK_THROWS_AS(Mixture(Matrix::Constant(1, 3, 0.5), {bad}), Error);
  CHECK_NOTHROW(fixtures::worked_example().validate());
}

TEST_CASE("exact trail distribution of the worked example") {
  const auto d = exact_trail_distribution(fixtures::worked_example());
  CHECK(d(0, 0, 0) == doctest::Approx(1.0 / 32.0).epsilon(1e-15));
  CHECK(d(2, 0, 2) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
  for (int k = 0; k < 4; ++k) CHECK(d(3, 0, k) == 0.0);
  CHECK(d.total() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("single absorbing state") {
  const Mixture m(Matrix::Ones(1, 1), {Matrix::Ones(1, 1)});
  CHECK(exact_trail_distribution(m)(0, 0, 0) == 1.0);
}

TEST_CASE("exact distribution matches the triple-loop oracle") {
  std::mt19937_64 rng(11);
  const Mixture m = fixtures::random_dense(3, 2, rng);
  const auto d = exact_trail_distribution(m);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) CHECK(d(i, j, k) == doctest::Approx(fixtures::trail_probability(m, i, j, k)));
    }
  }
}

TEST_CASE("slices of the worked example") {
  const auto d = exact_trail_distribution(fixtures::worked_example());
  Matrix o1(4, 4);
  o1 << 0.25, 0.25, 0, 0, 0.5, 0.5, 0, 0, 0, 0, 1.0 / 3.0, 0, 0, 0, 0, 0;
  o1 /= 8.0;
  CHECK((slice_O(d, 0) - o1).cwiseAbs().maxCoeff() <= 1e-15);
  Matrix o2(4, 4);
  o2 << 0.5, 0, 0, 0, 0, 0.25, 0, 0.25, 0, 1.0 / 6.0, 0, 1.0 / 6.0, 0, 0.5, 0, 0.5;
  o2 /= 8.0;
  CHECK((slice_O(d, 1) - o2).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(slice_O(d, 1)(0, 0) == doctest::Approx(1.0 / 16.0));
  CHECK(slice_O(d, 1)(1, 1) == doctest::Approx(1.0 / 32.0));
  CHECK_THROWS_AS(slice_O(d, 4), Error);
}

TEST_CASE("a state no trail passes through has an empty slice") {
  Matrix m(2, 2);
  m << 0, 1, 0, 1;
  const Mixture mix(Matrix::Constant(1, 2, 0.5), {m});
  CHECK(slice_O(exact_trail_distribution(mix), 0).isZero());
}

TEST_CASE("sparse storage above the dense limit agrees with lookups") {
  const int n = TrailDistribution::kDenseLimit + 1;
  std::vector<std::pair<Trail, double>> w{{{0, 1, 2}, 1.0}, {{n - 1, 0, n - 1}, 3.0}, {{0, 1, 2}, 1.0}};
  const auto d = TrailDistribution::from_weights(n, w, TrailDistribution::Kind::Empirical, 5);
  CHECK_FALSE(d.is_dense());
  CHECK(d(0, 1, 2) == doctest::Approx(0.4));
  CHECK(d(n - 1, 0, n - 1) == doctest::Approx(0.6));
  CHECK(d(1, 1, 1) == 0.0);
  CHECK(d.slice(0)(n - 1, n - 1) == doctest::Approx(0.6));
  CHECK_THROWS_AS(TrailDistribution::from_weights(3, {}, TrailDistribution::Kind::Empirical), Error);
}

TEST_CASE("sampling a deterministic mixture reproduces its paths") {
  Matrix m = Matrix::Zero(3, 3);
  m(0, 1) = m(1, 2) = m(2, 0) = 1.0;
  const Mixture mix(Matrix::Constant(1, 3, 1.0 / 3.0), {m});
  for (const auto& [t, c] : sample_trails(mix, 1000, 5)) {
    CHECK(t[1] == (t[0] + 1) % 3);
    CHECK(t[2] == (t[1] + 1) % 3);
  }
}

TEST_CASE("sampled worked example converges to the exact distribution") {
  const Mixture mix = fixtures::worked_example();
  const auto emp = sample_distribution(mix, 1000000, 0);
  CHECK(trail_error(emp, exact_trail_distribution(mix)) < 0.02);
  const auto from_trails = empirical_distribution(4, sample_trails(mix, 20000, 3));
  CHECK(trail_error(from_trails, exact_trail_distribution(mix)) < 0.05);
}

TEST_CASE("sampling is reproducible and independent of the thread count") {
  const Mixture mix = fixtures::worked_example();
  CHECK(sample_trails(mix, 1, 42) == sample_trails(mix, 1, 42));
  setenv("MCMIX_THREADS", "1", 1);
  const auto one = sample_trails(mix, 5000, 9);
  const auto d1 = sample_distribution(mix, 5000, 9);
  setenv("MCMIX_THREADS", "4", 1);
  const auto four = sample_trails(mix, 5000, 9);
  const auto d4 = sample_distribution(mix, 5000, 9);
  unsetenv("MCMIX_THREADS");
  CHECK(one == four);
  CHECK(trail_error(d1, d4) == 0.0);
}

TEST_CASE("sampling an empty row fails") {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  const Mixture mix(Matrix::Constant(1, 2, 0.5), {m});
  CHECK_THROWS_WITH_AS(sample_trails(mix, 100, 1), doctest::Contains("non-stochastic row"), Error);
}

TEST_CASE("ground-truth factors of the worked example") {
  const auto f = ground_truth_factors(fixtures::worked_example());
  Matrix p1(2, 4), q1(2, 4), p2(2, 4), q2(2, 4);
  p1 << 0.5, 1, 0, 0, 0, 0, 1.0 / 3.0, 0;
  q1 << 0.5, 0.5, 0, 0, 0, 0, 1, 0;
  p2 << 0.5, 0, 0, 0, 0, 0.5, 1.0 / 3.0, 1;  // state 4 -> 2 with probability 1 in chain 2
  q2 << 1, 0, 0, 0, 0, 0.5, 0, 0.5;
  CHECK((f.P[0] - p1 / 8.0).norm() < 1e-15);
  CHECK((f.Q[0] - q1 / 8.0).norm() < 1e-15);
  CHECK((f.P[1] - p2 / 8.0).norm() < 1e-15);
  CHECK((f.Q[1] - q2 / 8.0).norm() < 1e-15);
}

TEST_CASE("uniform single chain on two states") {
  const Mixture mix(Matrix::Constant(1, 2, 0.5), {Matrix::Constant(2, 2, 0.5)});
  const auto f = ground_truth_factors(mix);
  CHECK((f.P[0] - Matrix::Constant(1, 2, 0.25)).norm() < 1e-16);
  CHECK((f.Q[0] - Matrix::Constant(1, 2, 0.25)).norm() < 1e-16);
}

TEST_CASE("factorization identity and shuffle pairs") {
  std::mt19937_64 rng(3);
  const Mixture mix = fixtures::random_dense(4, 2, rng);
  const auto f = ground_truth_factors(mix);
  const auto d = exact_trail_distribution(mix);
  for (int j = 0; j < 4; ++j) {
    const Matrix o = f.P[j].transpose() * f.S[j].inverse() * f.Q[j];
    CHECK((slice_O(d, j) - o).norm() < 1e-12);
    for (int i = 0; i < 4; ++i) CHECK((f.P[j].col(i) - f.Q[i].col(j)).norm() < 1e-15);
  }
}

TEST_CASE("component structure of the worked example") {
  const auto cs = component_structure(fixtures::worked_example());
  REQUIRE(cs.r == 3);
  CHECK(cs.components[0].chain == 0);
  CHECK(cs.components[0].plus == std::vector<int>{0, 1});
  CHECK(cs.components[0].minus == std::vector<int>{0, 1});
  CHECK(cs.components[1].plus == std::vector<int>{2, 3});
  CHECK(cs.components[2].chain == 1);
  CHECK(cs.components[2].plus.size() == 4);
  CHECK(cs.companion_connected());
  Matrix xi1(3, 2);
  xi1 << 1, 0, 0, 0, 0, 1;
  CHECK(cs.Xi[0] == xi1);
  CHECK(cs.Xi[1] == xi1);
}

TEST_CASE("dense chain has one component") {
  std::mt19937_64 rng(1);
  const auto cs = component_structure(fixtures::random_dense(5, 1, rng));
  CHECK(cs.r == 1);
  for (const auto& x : cs.Xi) CHECK(x == Matrix::Ones(1, 1));
}

TEST_CASE("random walk on an even cycle is not companion-connected") {
  std::vector<std::vector<int>> succ;
  for (int i = 0; i < 6; ++i) succ.push_back({(i + 1) % 6, (i + 5) % 6});
  const Mixture mix(Matrix::Constant(1, 6, 1.0 / 6.0), {uniform_chain(6, succ)});
  const auto cs = component_structure(mix);
  CHECK(cs.r == 2);
  for (int j = 0; j < 6; ++j) CHECK(cs.plus_comp[0][j] != cs.minus_comp[0][j]);
  CHECK_FALSE(cs.companion_connected());
}

TEST_CASE("recoverability of the worked example") {
  const auto rep = verify_recoverability(fixtures::worked_example());
  CHECK(rep.companion_connected);
  CHECK(rep.cokernel_dim == 3);
  CHECK(rep.cokernel_dim_equals_r);
  CHECK_FALSE(rep.ratios_distinct);
  CHECK_FALSE(rep.recoverable());
}

TEST_CASE("single disconnected chain") {
  const Mixture mix(Matrix::Constant(1, 4, 0.25), {uniform_chain(4, {{0, 1}, {0, 1}, {2, 3}, {2, 3}})});
  const auto rep = verify_recoverability(mix);
  CHECK(rep.companion_connected);
  CHECK(rep.r == 2);
  CHECK(rep.cokernel_dim == 2);
}

TEST_CASE("zero start probabilities are flagged") {
  Matrix s = Matrix::Constant(2, 4, 1.0 / 7.0);
  s(1, 3) = 0.0;
  const Mixture mix(s, fixtures::worked_example().chains());
  const auto rep = verify_recoverability(mix);
  CHECK_FALSE(rep.ratios_distinct);
  bool noted = false;
  for (const auto& note : rep.notes) noted = noted || note.find("zero start") != std::string::npos;
  CHECK(noted);
}

TEST_CASE("generated mixtures pass every recoverability check") {
  for (int seed = 0; seed < 5; ++seed) {
    const Mixture mix = generate_mixture({12, 2, 4, static_cast<std::uint64_t>(seed), true, 2});
    CHECK(verify_recoverability(mix).recoverable());
  }
}

TEST_CASE("indicator vectors annihilate the shuffle matrix") {
  const Mixture mix = generate_mixture({10, 2, 4, 7, true, 2});
  const auto f = ground_truth_factors(mix);
  const Matrix a = build_shuffle_matrix(f.P, f.Q);
  const auto cs = component_structure(mix);
  for (int q = 0; q < cs.r; ++q) CHECK((cs.xi.row(q) * a).norm() < 1e-10);
  // All-ones on one chain's rows.
  const int n = mix.n(), L = mix.L();
  for (int l = 0; l < L; ++l) {
    Vector w = Vector::Zero(2 * L * n);
    for (int j = 0; j < n; ++j) w(j * L + l) = w(L * n + j * L + l) = 1.0;
    CHECK((w.transpose() * a).norm() < 1e-12);
  }
}

TEST_CASE("quadratic form identity for the shuffle matrix") {
  std::mt19937_64 rng(5);
  const int n = 4, L = 2;
  const Mixture mix = fixtures::random_dense(n, L, rng);
  const auto f = ground_truth_factors(mix);
  const Matrix a = build_shuffle_matrix(f.P, f.Q);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 100; ++t) {
    Vector v(2 * L * n);
    for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = normal(rng);
    double rhs = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double dot = 0.0;
        for (int l = 0; l < L; ++l) dot += (v(j * L + l) - v(L * n + i * L + l)) * mix.s(l, i) * mix.M(l, i, j);
        rhs += dot * dot;
      }
    }
    CHECK((v.transpose() * a).squaredNorm() == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("shuffle matrix layout") {
  const Matrix p = Matrix::Constant(1, 1, 0.7);
  const Matrix a = build_shuffle_matrix({p}, {p});
  REQUIRE(a.rows() == 2);
  REQUIRE(a.cols() == 1);
  CHECK(a(0, 0) == 0.7);
  CHECK(a(1, 0) == -0.7);
  CHECK((Vector::Ones(2).transpose() * a).norm() == 0.0);
  CHECK_THROWS_AS(build_shuffle_matrix({p, p}, {p}), Error);
}

TEST_CASE("perturbing a column breaks the annihilation") {
  auto f = ground_truth_factors(fixtures::worked_example());
  f.P[0](0, 1) += 0.01;
  const Matrix a = build_shuffle_matrix(f.P, f.Q);
  Vector w = Vector::Zero(16);
  for (int j = 0; j < 4; ++j) w(j * 2) = w(8 + j * 2) = 1.0;
  CHECK((w.transpose() * a).norm() > 1e-3);
}

TEST_CASE("component structure depends only on the support") {
  const Mixture mix = generate_mixture({10, 2, 5, 3, true, 2});
  std::vector<Matrix> scaled = mix.chains();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (auto& m : scaled) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) *= u(rng);
      m.row(i) /= m.row(i).sum();
    }
  }
  const auto a = component_structure(mix);
  const auto b = component_structure(Mixture(mix.start(), scaled));
  CHECK(a.r == b.r);
  CHECK(a.plus_comp == b.plus_comp);
  CHECK(a.minus_comp == b.minus_comp);
}

}  // TEST_SUITE
