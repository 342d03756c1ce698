#include "mcmix/generator.hpp"

#include <map>
#include <string>
#include <vector>

#include "mcmix/error.hpp"
#include "mcmix/structure.hpp"

namespace mcmix {
namespace {

constexpr int kNumericRetries = 1000;
constexpr long kStructureRetries = 1000000;

double positive_uniform(std::mt19937_64& rng) {
  // (0, 1]: rows never vanish.
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
}

// parts[l][j]: part index of state j in chain l.
bool draw_structure(const GeneratorSpec& spec, std::mt19937_64& rng, std::vector<std::vector<int>>& parts) {
  const int n = spec.n;
  const int L = spec.L;
  std::vector<int> splits(static_cast<size_t>(L), 0);
  std::uniform_int_distribution<int> pick_chain(0, L - 1);
  for (int s = 0; s < spec.r - L; ++s) ++splits[static_cast<size_t>(pick_chain(rng))];
  parts.assign(static_cast<size_t>(L), std::vector<int>(static_cast<size_t>(n), 0));
  for (int l = 0; l < L; ++l) {
    const int k = splits[static_cast<size_t>(l)] + 1;
    if (k * spec.min_component_size > n) return false;
    if (k == 1) continue;
    std::uniform_int_distribution<int> pick_part(0, k - 1);
    std::vector<int> size(static_cast<size_t>(k), 0);
    for (int j = 0; j < n; ++j) {
      const int p = pick_part(rng);
      parts[static_cast<size_t>(l)][static_cast<size_t>(j)] = p;
      ++size[static_cast<size_t>(p)];
    }
    for (int sz : size) {
      if (sz < spec.min_component_size) return false;
    }
  }
  if (spec.ensure_recoverable) {
    // Every state needs a companion: another state in the same part of every chain.
    std::map<std::vector<int>, int> cells;
    for (int j = 0; j < n; ++j) {
      std::vector<int> key(static_cast<size_t>(L));
      for (int l = 0; l < L; ++l) key[static_cast<size_t>(l)] = parts[static_cast<size_t>(l)][static_cast<size_t>(j)];
      ++cells[key];
    }
    for (const auto& [key, count] : cells) {
      if (count < 2) return false;
    }
  }
  return true;
}

}  // namespace

Matrix random_stochastic(int rows, int cols, std::mt19937_64& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = positive_uniform(rng);
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

Mixture random_mixture(int n, int L, std::mt19937_64& rng) {
  std::vector<Matrix> chains;
  for (int l = 0; l < L; ++l) chains.push_back(random_stochastic(n, n, rng));
  Matrix start(L, n);
  for (int l = 0; l < L; ++l) {
    for (int i = 0; i < n; ++i) start(l, i) = positive_uniform(rng);
  }
  start /= start.sum();
  return Mixture(std::move(start), std::move(chains));
}

Mixture generate_mixture(const GeneratorSpec& spec) {
  if (spec.L < 1 || spec.n < 2 * spec.L) throw Error(ErrorKind::InvalidArgument, "generate: need n >= 2L >= 2");
  if (spec.r < spec.L) throw Error(ErrorKind::InvalidArgument, "generate: need r >= L");
  if (spec.min_component_size < 1) throw Error(ErrorKind::InvalidArgument, "generate: min_component_size must be positive");
  const int even_parts = (spec.r - spec.L + spec.L - 1) / spec.L + 1;
  if (even_parts * spec.min_component_size > spec.n) {
    throw Error(ErrorKind::InvalidArgument, "generate: components cannot reach min_component_size");
  }
  std::mt19937_64 rng(spec.seed);
  std::string last = "structure never satisfied the size constraints";
  for (int attempt = 0; attempt < kNumericRetries; ++attempt) {
    std::vector<std::vector<int>> parts;
    bool ok = false;
    for (long t = 0; t < kStructureRetries && !ok; ++t) ok = draw_structure(spec, rng, parts);
    if (!ok) break;
    std::vector<Matrix> chains;
    for (int l = 0; l < spec.L; ++l) {
      Matrix m = random_stochastic(spec.n, spec.n, rng);
      const auto& p = parts[static_cast<size_t>(l)];
      for (int i = 0; i < spec.n; ++i) {
        for (int j = 0; j < spec.n; ++j) {
          if (p[static_cast<size_t>(i)] != p[static_cast<size_t>(j)]) m(i, j) = 0.0;
        }
        m.row(i) /= m.row(i).sum();
      }
      chains.push_back(std::move(m));
    }
    Matrix start(spec.L, spec.n);
    for (int l = 0; l < spec.L; ++l) {
      for (int i = 0; i < spec.n; ++i) start(l, i) = positive_uniform(rng);
    }
    start /= start.sum();
    Mixture mix(std::move(start), std::move(chains));
    if (!spec.ensure_recoverable) return mix;
    const RecoverabilityReport rep = verify_recoverability(mix);
    if (rep.recoverable() && rep.r == spec.r) return mix;
    last.clear();
    for (const auto& note : rep.notes) last += (last.empty() ? "" : "; ") + note;
  }
  throw Error(ErrorKind::GenerationFailed, "generation failed: " + last);
}

}  // namespace mcmix
