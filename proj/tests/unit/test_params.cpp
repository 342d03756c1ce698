#include <random>
#include <set>

#include <Eigen/SVD>
#include <doctest.h>

#include "../support/fixtures.hpp"
#include "mcmix/error.hpp"
#include "mcmix/generator.hpp"
#include "mcmix/params.hpp"
#include "mcmix/structure.hpp"
#include "mcmix/trail_distribution.hpp"

using namespace mcmix;

namespace {

Vector svals(const Matrix& a) { return Eigen::JacobiSVD<Matrix>(a).singularValues(); }

double sv(const Matrix& a, int k) {
  const Vector s = svals(a);
  return k <= s.size() ? s(k - 1) : 0.0;
}

Mixture generated(int n, int L, int r, std::uint64_t seed) {
  GeneratorSpec g;
  g.n = n;
  g.L = L;
  g.r = r;
  g.seed = seed;
  return generate_mixture(g);
}

}  // namespace

TEST_SUITE("param-estimation") {

TEST_CASE("sigma_L(O_j) lies between the two bounds") {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 10; ++t) {
    const auto mix = fixtures::random_dense(8, 3, rng);
    for (int j = 0; j < 8; ++j) {
      const auto b = degen_bounds(mix, j);
      // Independent oracle for the three quantities.
      Matrix o(8, 8), p(3, 8), mp(3, 8);
      for (int i = 0; i < 8; ++i)
        for (int k = 0; k < 8; ++k) o(i, k) = fixtures::trail_probability(mix, i, j, k);
      for (int l = 0; l < 3; ++l) {
        for (int i = 0; i < 8; ++i) {
          p(l, i) = mix.s(l, i) * mix.M(l, i, j);
          mp(l, i) = mix.M(l, j, i);
        }
      }
      CHECK(b.sigma_L == doctest::Approx(sv(o, 3)).epsilon(1e-9));
      CHECK(b.lower == doctest::Approx(sv(p, 3) * sv(mp, 3)).epsilon(1e-9));
      CHECK(b.upper == doctest::Approx(std::sqrt(3.0) * std::min(sv(p, 3), sv(mp, 3))).epsilon(1e-9));
      CHECK(b.holds);
    }
  }
}

TEST_CASE("spectrum summary picks the number of chains") {
  std::mt19937_64 rng(2);
  SUBCASE("single chain") {
    const auto s = spectrum_summary(exact_trail_distribution(fixtures::random_dense(6, 1, rng)));
    CHECK(s.chosen_L == 1);
  }
  SUBCASE("three chains, checked against a direct average") {
    const auto mix = fixtures::random_dense(10, 3, rng);
    const auto d = exact_trail_distribution(mix);
    const auto s = spectrum_summary(d);
    CHECK(s.chosen_L == 3);
    Vector bar = Vector::Zero(10);
    for (int j = 0; j < 10; ++j) bar += svals(d.slice(j));
    bar /= 10.0;
    CHECK((s.sigma_bar - bar).norm() < 1e-12);
  }
}

TEST_CASE("rank estimate") {
  SUBCASE("worked example has three components") {
    CHECK(estimate_r(exact_trail_distribution(fixtures::worked_example()), 2).r_hat == 3);
  }
  SUBCASE("generated mixtures") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto mix = generated(12, 3, 6, seed);
      CHECK(estimate_r(exact_trail_distribution(mix), 3).r_hat == 6);
    }
  }
  SUBCASE("synthetic spectrum") {
    Vector s(6);
    s << 10, 9, 8, 7, 1e-12, 1e-13;
    CHECK(choose_r(s, 1, 3).r_hat == 2);
  }
  SUBCASE("r is at least L") {
    Vector s(6);
    s << 10, 9, 8, 7, 6, 1e-13;
    CHECK(choose_r(s, 2, 3).r_hat >= 2);
  }
}

TEST_CASE("cut matrix") {
  SUBCASE("singleton i-") {
    std::mt19937_64 rng(3);
    const auto mix = fixtures::random_dense(5, 2, rng);
    const auto c = cut_matrix(mix, {5 + 2});
    REQUIRE(c.columns.size() == 5);
    for (int j = 0; j < 5; ++j) CHECK(c.columns[j] == std::pair<int, int>{2, j});
  }
  SUBCASE("component of chain 1 in the worked example") {
    // S = {1+, 2+, 1-, 2-}. Crossing transitions are i in {1,2}, j in {3,4}
    // or the reverse; chain 1 has none, chain 2 has 1->3, 2->4, 3->1, 3->2, 4->2.
    const auto c = cut_matrix(fixtures::worked_example(), {0, 1, 4, 5});
    const std::vector<std::pair<int, int>> want{{0, 2}, {1, 3}, {2, 0}, {2, 1}, {3, 1}};
    CHECK(c.columns == want);
    CHECK(c.values.row(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.values(1, 0) == doctest::Approx(1.0 / 8.0));
    CHECK(c.values(1, 2) == doctest::Approx(1.0 / 24.0));
    CHECK(c.sigma_L() == 0.0);
  }
  SUBCASE("norm of w^T Q_S computed two ways") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 20; ++t) {
      const auto mix = fixtures::random_dense(6, 3, rng);
      std::vector<int> S;
      std::vector<char> in(12, 0);
      for (int v = 0; v < 12; ++v) {
        if (u(rng) > 0.0) {
          S.push_back(v);
          in[v] = 1;
        }
      }
      if (S.empty() || S.size() == 12) continue;
      const auto c = cut_matrix(mix, S);
      Vector w(3);
      for (int l = 0; l < 3; ++l) w(l) = u(rng);
      double direct = 0.0;
      for (int i = 0; i < 6; ++i) {
        for (int j = 0; j < 6; ++j) {
          if (in[6 + i] == in[j]) continue;
          double x = 0.0;
          for (int l = 0; l < 3; ++l) x += w(l) * mix.s(l, i) * mix.M(l, i, j);
          direct += x * x;
        }
      }
      CHECK((w.transpose() * c.values).squaredNorm() == doctest::Approx(direct).epsilon(1e-12));
    }
  }
  SUBCASE("improper cuts") {
    const auto mix = fixtures::worked_example();
    CHECK_THROWS_AS(cut_matrix(mix, {}), Error);
    CHECK_THROWS_AS(cut_matrix(mix, {0, 1, 2, 3, 4, 5, 6, 7}), Error);
    CHECK_THROWS_AS(cut_matrix(mix, {8}), Error);
  }
}

TEST_CASE("sigma bound with a full component cut") {
  // A cut equal to one whole component of chain l carries no chain-l mass,
  // so sigma_L(Q_S) = 0 while the co-kernel gap stays positive: the bound
  // as stated cannot hold for such cuts.
  const auto mix = generated(10, 2, 3, 6);
  const auto cs = component_structure(mix);
  const Component* small = nullptr;
  for (const auto& c : cs.components) {
    if (!small || c.plus.size() + c.minus.size() < small->plus.size() + small->minus.size()) small = &c;
  }
  REQUIRE(small != nullptr);
  std::vector<int> S;
  for (int j : small->plus) S.push_back(j);
  for (int i : small->minus) S.push_back(10 + i);
  const auto b = sigma_bound_check(mix, S);
  CHECK(b.rhs == 0.0);
  CHECK(b.lhs > 1e-6);
  CHECK_FALSE(b.holds);
}

TEST_CASE("sigma bound on random cuts of dense mixtures") {
  std::mt19937_64 rng(21);
  std::bernoulli_distribution coin(0.5);
  for (int t = 0; t < 20; ++t) {
    const auto mix = fixtures::random_dense(6, 2, rng);
    std::vector<int> S;
    while (S.empty() || S.size() == 12) {
      S.clear();
      for (int v = 0; v < 12; ++v)
        if (coin(rng)) S.push_back(v);
    }
    const auto b = sigma_bound_check(mix, S);
    CHECK(b.lhs == doctest::Approx(smallest_nonzero_shuffle_sigma(mix)));
    CHECK(b.holds_squared == (b.lhs * b.lhs <= b.rhs + 1e-10));
  }
}

TEST_CASE("gap against chain distance") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 10; ++t) {
    const auto mix = fixtures::random_dense(6, 3, rng);
    for (int a = 0; a < 3; ++a) {
      for (int b = a + 1; b < 3; ++b) {
        const auto r = tv_bound_check(mix, a, b);
        double tv = 0.0;
        for (int i = 0; i < 6; ++i)
          for (int j = 0; j < 6; ++j) tv += std::abs(mix.M(a, i, j) - mix.M(b, i, j));
        CHECK(r.tv == doctest::Approx(tv / 12.0));
        CHECK(r.holds);
      }
    }
  }
  CHECK_THROWS_AS(tv_bound_check(fixtures::worked_example(), 1, 1), Error);
}

TEST_CASE("identical chains close the gap") {
  std::mt19937_64 rng(6);
  const auto base = fixtures::random_dense(6, 1, rng);
  Matrix s(2, 6);
  s.row(0) = base.start().row(0) * 0.3;
  s.row(1) = base.start().row(0) * 0.7;
  const Mixture twin(s, {base.chain(0), base.chain(0)});
  CHECK(smallest_nonzero_shuffle_sigma(twin) <= 1e-8);
}

}
