#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mcmix/mixture.hpp"

namespace mcmix {

struct Trail {
  int i = 0;
  int j = 0;
  int k = 0;
  friend bool operator==(const Trail&, const Trail&) = default;
  friend auto operator<=>(const Trail&, const Trail&) = default;
};

// Probability mass over [n]^3. Exact distributions are stored densely for
// n <= kDenseLimit and sparsely above; empirical ones are always sparse and
// remember how many samples produced them.
class TrailDistribution {
 public:
  enum class Kind { Exact, Empirical };

  struct Entry {
    std::uint64_t index = 0;  // (i * n + j) * n + k
    double p = 0.0;
  };

  static constexpr int kDenseLimit = 64;

  TrailDistribution() = default;

  // mass must have n^3 entries laid out as (i * n + j) * n + k.
  static TrailDistribution exact(int n, std::vector<double> mass);
  // Entries may be unsorted and contain duplicate indices (they are summed).
  static TrailDistribution sparse(int n, std::vector<Entry> entries, Kind kind,
                                  std::uint64_t sample_count = 0);
  // Normalizes non-negative weights so that they sum to one.
  static TrailDistribution from_weights(int n, const std::vector<std::pair<Trail, double>>& weighted,
                                        Kind kind, std::uint64_t sample_count = 0);

  int n() const { return n_; }
  Kind kind() const { return kind_; }
  bool is_exact() const { return kind_ == Kind::Exact; }
  std::uint64_t sample_count() const { return sample_count_; }
  bool is_dense() const { return !dense_.empty(); }

  double operator()(int i, int j, int k) const;
  double total() const;

  // O_j(i, k) = p(i, j, k).
  Matrix slice(int j) const;
  std::vector<Matrix> slices() const;

  // Visits every entry with positive mass in index order.
  void for_each(const std::function<void(const Trail&, double)>& fn) const;
  std::vector<std::pair<Trail, double>> support() const;

  std::uint64_t index_of(int i, int j, int k) const {
    const auto n = static_cast<std::uint64_t>(n_);
    return (static_cast<std::uint64_t>(i) * n + static_cast<std::uint64_t>(j)) * n +
           static_cast<std::uint64_t>(k);
  }
  Trail trail_of(std::uint64_t index) const;

 private:
  int n_ = 0;
  Kind kind_ = Kind::Exact;
  std::uint64_t sample_count_ = 0;
  std::vector<double> dense_;
  std::vector<Entry> sparse_;  // sorted by index, unique, p > 0
};

// p(i, j, k) = sum_l s^l_i M^l_ij M^l_jk.
TrailDistribution exact_trail_distribution(const Mixture& mixture);

// O_j of a distribution, with the index checked.
Matrix slice_O(const TrailDistribution& dist, int j);

}  // namespace mcmix
