#include "mcmix/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <random>
#include <thread>
#include <unordered_map>

#include "mcmix/error.hpp"

namespace mcmix {
namespace {

// Work is always cut into this many chunks, each with its own stream, so the
// thread count only changes who runs a chunk.
constexpr int kChunks = 16;

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int draw(const std::vector<double>& cumulative, double u) {
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u * cumulative.back());
  if (it == cumulative.end()) --it;
  return static_cast<int>(it - cumulative.begin());
}

struct Sampler {
  int n = 0;
  int L = 0;
  std::vector<double> start_cum;                   // over l * n + i
  std::vector<std::vector<std::vector<double>>> row_cum;  // [l][i] cumulative
  std::vector<std::vector<char>> empty_row;

  explicit Sampler(const Mixture& m) : n(m.n()), L(m.L()) {
    start_cum.reserve(static_cast<size_t>(L * n));
    double acc = 0.0;
    for (int l = 0; l < L; ++l) {
      for (int i = 0; i < n; ++i) {
        acc += std::max(0.0, m.s(l, i));
        start_cum.push_back(acc);
      }
    }
    if (!(acc > 0.0)) throw Error(ErrorKind::InvalidArgument, "sampling: start probabilities are all zero");
    row_cum.assign(static_cast<size_t>(L), {});
    empty_row.assign(static_cast<size_t>(L), std::vector<char>(static_cast<size_t>(n), 0));
    for (int l = 0; l < L; ++l) {
      auto& rows = row_cum[static_cast<size_t>(l)];
      rows.resize(static_cast<size_t>(n));
      for (int i = 0; i < n; ++i) {
        auto& c = rows[static_cast<size_t>(i)];
        c.resize(static_cast<size_t>(n));
        double a = 0.0;
        for (int j = 0; j < n; ++j) {
          a += std::max(0.0, m.M(l, i, j));
          c[static_cast<size_t>(j)] = a;
        }
        if (!(a > 0.0)) empty_row[static_cast<size_t>(l)][static_cast<size_t>(i)] = 1;
      }
    }
  }

  template <typename Visit>
  void run(std::mt19937_64& rng, int length, int* path, Visit&& visit) const {
    const int si = draw(start_cum, uniform01(rng));
    const int l = si / n;
    path[0] = si % n;
    for (int t = 1; t < length; ++t) {
      const int from = path[t - 1];
      if (empty_row[static_cast<size_t>(l)][static_cast<size_t>(from)]) {
        throw Error(ErrorKind::NonStochasticRow,
                    "non-stochastic row: state " + std::to_string(from + 1) + " of chain " +
                        std::to_string(l + 1) + " has no outgoing mass");
      }
      path[t] = draw(row_cum[static_cast<size_t>(l)][static_cast<size_t>(from)], uniform01(rng));
    }
    visit(path);
  }
};

std::uint64_t chunk_size(std::uint64_t count, int chunk) {
  const std::uint64_t base = count / kChunks;
  return base + (static_cast<std::uint64_t>(chunk) < count % kChunks ? 1 : 0);
}

std::mt19937_64 chunk_rng(std::uint64_t seed, int chunk) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(chunk), 0x6d636d69u};
  return std::mt19937_64(seq);
}

// Runs fn(chunk) for every chunk on up to worker_threads() threads and
// rethrows the first failure in chunk order.
template <typename Fn>
void for_each_chunk(Fn&& fn) {
  const int threads = std::clamp(worker_threads(), 1, kChunks);
  std::vector<std::exception_ptr> errors(kChunks);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int c = next++; c < kChunks; c = next++) {
      try {
        fn(c);
      } catch (...) {
        errors[static_cast<size_t>(c)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

int worker_threads() {
  if (const char* env = std::getenv("MCMIX_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

TrailMultiset sample_trails(const Mixture& mixture, std::uint64_t count, std::uint64_t seed, int length) {
  if (length < 1) throw Error(ErrorKind::InvalidArgument, "sample_trails: length must be at least 1");
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "sample_trails: count must be at least 1");
  const Sampler sampler(mixture);
  std::vector<TrailMultiset> parts(kChunks);
  for_each_chunk([&](int c) {
    auto rng = chunk_rng(seed, c);
    std::vector<int> path(static_cast<size_t>(length));
    auto& out = parts[static_cast<size_t>(c)];
    for (std::uint64_t s = 0, m = chunk_size(count, c); s < m; ++s) {
      sampler.run(rng, length, path.data(), [&](const int*) { ++out[path]; });
    }
  });
  TrailMultiset merged;
  for (const auto& part : parts) {
    for (const auto& [trail, k] : part) merged[trail] += k;
  }
  return merged;
}

TrailDistribution sample_distribution(const Mixture& mixture, std::uint64_t count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorKind::InvalidArgument, "sample_trails: count must be at least 1");
  const Sampler sampler(mixture);
  const int n = mixture.n();
  const auto cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n) *
                     static_cast<std::uint64_t>(n);
  const bool dense = n <= TrailDistribution::kDenseLimit;
  std::vector<std::vector<std::uint64_t>> dense_parts(dense ? kChunks : 0);
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> sparse_parts(dense ? 0 : kChunks);
  for_each_chunk([&](int c) {
    auto rng = chunk_rng(seed, c);
    int path[3];
    auto un = static_cast<std::uint64_t>(n);
    if (dense) {
      auto& counts = dense_parts[static_cast<size_t>(c)];
      counts.assign(static_cast<size_t>(cells), 0);
      for (std::uint64_t s = 0, m = chunk_size(count, c); s < m; ++s) {
        sampler.run(rng, 3, path, [&](const int* p) {
          ++counts[(static_cast<std::uint64_t>(p[0]) * un + static_cast<std::uint64_t>(p[1])) * un +
                   static_cast<std::uint64_t>(p[2])];
        });
      }
    } else {
      auto& counts = sparse_parts[static_cast<size_t>(c)];
      for (std::uint64_t s = 0, m = chunk_size(count, c); s < m; ++s) {
        sampler.run(rng, 3, path, [&](const int* p) {
          ++counts[(static_cast<std::uint64_t>(p[0]) * un + static_cast<std::uint64_t>(p[1])) * un +
                   static_cast<std::uint64_t>(p[2])];
        });
      }
    }
  });
  std::vector<TrailDistribution::Entry> entries;
  const double total = static_cast<double>(count);
  if (dense) {
    std::vector<std::uint64_t> merged(static_cast<size_t>(cells), 0);
    for (const auto& part : dense_parts) {
      for (size_t idx = 0; idx < part.size(); ++idx) merged[idx] += part[idx];
    }
    for (size_t idx = 0; idx < merged.size(); ++idx) {
      if (merged[idx] > 0) entries.push_back({idx, static_cast<double>(merged[idx]) / total});
    }
  } else {
    std::map<std::uint64_t, std::uint64_t> merged;
    for (const auto& part : sparse_parts) {
      for (const auto& [idx, k] : part) merged[idx] += k;
    }
    for (const auto& [idx, k] : merged) entries.push_back({idx, static_cast<double>(k) / total});
  }
  return TrailDistribution::sparse(n, std::move(entries), TrailDistribution::Kind::Empirical, count);
}

TrailDistribution empirical_distribution(int n, const TrailMultiset& trails) {
  std::vector<std::pair<Trail, double>> weighted;
  std::uint64_t total = 0;
  for (const auto& [t, k] : trails) {
    if (t.size() != 3) throw Error(ErrorKind::InvalidArgument, "empirical distribution needs length-3 trails");
    weighted.push_back({Trail{t[0], t[1], t[2]}, static_cast<double>(k)});
    total += k;
  }
  return TrailDistribution::from_weights(n, weighted, TrailDistribution::Kind::Empirical, total);
}

}  // namespace mcmix
