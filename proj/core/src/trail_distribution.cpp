#include "mcmix/trail_distribution.hpp"

#include <cmath>
#include <algorithm>

#include "mcmix/error.hpp"

namespace mcmix {

TrailDistribution TrailDistribution::exact(int n, std::vector<double> mass) {
  const auto cells = static_cast<size_t>(n) * static_cast<size_t>(n) * static_cast<size_t>(n);
  if (n < 1 || mass.size() != cells) {
    throw Error(ErrorKind::ShapeMismatch, "trail distribution: dense mass must have n^3 entries");
  }
  TrailDistribution d;
  d.n_ = n;
  d.kind_ = Kind::Exact;
  if (n <= kDenseLimit) {
    d.dense_ = std::move(mass);
  } else {
    for (size_t idx = 0; idx < mass.size(); ++idx) {
      if (mass[idx] > 0.0) d.sparse_.push_back({idx, mass[idx]});
    }
  }
  return d;
}

TrailDistribution TrailDistribution::sparse(int n, std::vector<Entry> entries, Kind kind,
                                            std::uint64_t sample_count) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "trail distribution: n must be positive");
  const auto cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n) *
                     static_cast<std::uint64_t>(n);
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.index < b.index; });
  TrailDistribution d;
  d.n_ = n;
  d.kind_ = kind;
  d.sample_count_ = sample_count;
  for (const auto& e : entries) {
    if (e.index >= cells) throw Error(ErrorKind::IndexOutOfRange, "trail distribution: trail index out of range");
    if (e.p < 0.0) throw Error(ErrorKind::InvalidArgument, "trail distribution: negative mass");
    if (e.p == 0.0) continue;
    if (!d.sparse_.empty() && d.sparse_.back().index == e.index) {
      d.sparse_.back().p += e.p;
    } else {
      d.sparse_.push_back(e);
    }
  }
  if (kind == Kind::Exact && n <= kDenseLimit) {
    d.dense_.assign(static_cast<size_t>(cells), 0.0);
    for (const auto& e : d.sparse_) d.dense_[e.index] = e.p;
    d.sparse_.clear();
  }
  return d;
}

TrailDistribution TrailDistribution::from_weights(int n,
                                                  const std::vector<std::pair<Trail, double>>& weighted,
                                                  Kind kind, std::uint64_t sample_count) {
  double total = 0.0;
  for (const auto& [t, w] : weighted) {
    if (w < 0.0) throw Error(ErrorKind::InvalidArgument, "trail distribution: negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::NoTrails, "no trails");
  // Already normalized input is kept bit for bit so text files round-trip.
  if (std::abs(total - 1.0) <= 1e-12) total = 1.0;
  std::vector<Entry> entries;
  entries.reserve(weighted.size());
  TrailDistribution probe;
  probe.n_ = n;
  for (const auto& [t, w] : weighted) {
    if (t.i < 0 || t.j < 0 || t.k < 0 || t.i >= n || t.j >= n || t.k >= n) {
      throw Error(ErrorKind::IndexOutOfRange, "trail distribution: state outside [1, n]");
    }
    entries.push_back({probe.index_of(t.i, t.j, t.k), w / total});
  }
  return sparse(n, std::move(entries), kind, sample_count);
}

double TrailDistribution::operator()(int i, int j, int k) const {
  if (i < 0 || j < 0 || k < 0 || i >= n_ || j >= n_ || k >= n_) {
    throw Error(ErrorKind::IndexOutOfRange, "trail distribution: index out of range");
  }
  const auto idx = index_of(i, j, k);
  if (is_dense()) return dense_[idx];
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), idx,
                             [](const Entry& e, std::uint64_t v) { return e.index < v; });
  return (it != sparse_.end() && it->index == idx) ? it->p : 0.0;
}

double TrailDistribution::total() const {
  double t = 0.0;
  if (is_dense()) {
    for (double p : dense_) t += p;
  } else {
    for (const auto& e : sparse_) t += e.p;
  }
  return t;
}

Trail TrailDistribution::trail_of(std::uint64_t index) const {
  const auto n = static_cast<std::uint64_t>(n_);
  Trail t;
  t.k = static_cast<int>(index % n);
  t.j = static_cast<int>((index / n) % n);
  t.i = static_cast<int>(index / (n * n));
  return t;
}

Matrix TrailDistribution::slice(int j) const {
  if (j < 0 || j >= n_) throw Error(ErrorKind::IndexOutOfRange, "slice_O: state index out of range");
  Matrix o = Matrix::Zero(n_, n_);
  if (is_dense()) {
    for (int i = 0; i < n_; ++i) {
      for (int k = 0; k < n_; ++k) o(i, k) = dense_[index_of(i, j, k)];
    }
  } else {
    for (const auto& e : sparse_) {
      const Trail t = trail_of(e.index);
      if (t.j == j) o(t.i, t.k) = e.p;
    }
  }
  return o;
}

std::vector<Matrix> TrailDistribution::slices() const {
  std::vector<Matrix> out(static_cast<size_t>(n_), Matrix::Zero(n_, n_));
  for_each([&](const Trail& t, double p) { out[static_cast<size_t>(t.j)](t.i, t.k) = p; });
  return out;
}

void TrailDistribution::for_each(const std::function<void(const Trail&, double)>& fn) const {
  if (is_dense()) {
    for (size_t idx = 0; idx < dense_.size(); ++idx) {
      if (dense_[idx] > 0.0) fn(trail_of(idx), dense_[idx]);
    }
  } else {
    for (const auto& e : sparse_) fn(trail_of(e.index), e.p);
  }
}

std::vector<std::pair<Trail, double>> TrailDistribution::support() const {
  std::vector<std::pair<Trail, double>> out;
  for_each([&](const Trail& t, double p) { out.emplace_back(t, p); });
  return out;
}

TrailDistribution exact_trail_distribution(const Mixture& mixture) {
  const int n = mixture.n();
  const int L = mixture.L();
  std::vector<double> mass(static_cast<size_t>(n) * static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
  for (int l = 0; l < L; ++l) {
    const Matrix& m = mixture.chain(l);
    for (int i = 0; i < n; ++i) {
      const double si = mixture.s(l, i);
      if (si == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        const double first = si * m(i, j);
        if (first == 0.0) continue;
        const size_t base = (static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)) *
                            static_cast<size_t>(n);
        for (int k = 0; k < n; ++k) mass[base + static_cast<size_t>(k)] += first * m(j, k);
      }
    }
  }
  return TrailDistribution::exact(n, std::move(mass));
}

Matrix slice_O(const TrailDistribution& dist, int j) { return dist.slice(j); }

}  // namespace mcmix
