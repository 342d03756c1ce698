#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmix/mixture.hpp"
#include "mcmix/params.hpp"
#include "mcmix/spectral.hpp"
#include "mcmix/trail_distribution.hpp"

namespace mcmix {

// Methods: "ca-svd", "gkv-svd", "em", "ca-svd+em".
struct MethodConfig {
  std::optional<int> r;  // co-kernel dimension for ca-svd; estimated when empty
  std::uint64_t seed = 0;
  int em_iters = 100;
  int refine_iters = 5;
};

struct MethodResult {
  Mixture mixture;
  int em_iters = 0;
  std::vector<std::string> warnings;
  std::optional<RecoveryReport> report;  // spectral methods only, before refinement
};

MethodResult run_method(const std::string& method, const TrailDistribution& dist, int L, const MethodConfig& cfg);

bool is_known_method(const std::string& method);

struct ExperimentSpec {
  std::vector<int> n;
  std::vector<int> L;
  std::vector<int> r;
  std::vector<std::uint64_t> samples;  // 0 means the exact distribution
  std::vector<std::string> methods;
  std::vector<std::uint64_t> seeds;
  int em_iters = 100;
  int refine_iters = 5;
  bool known_r = false;  // hand the generator's r to ca-svd
  std::string output;
};

// JSON object; grid fields accept a number or a list. "repeats": k is
// shorthand for seeds 0..k-1.
ExperimentSpec experiment_spec_from_json(const std::string& text);

struct ExperimentRow {
  std::string method;
  int n = 0;
  int L = 0;
  int r = 0;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
  double trail_error = 0.0;     // TV between the input and the learned 3-trail distributions
  double recovery_error = 0.0;
  double wall_ms = 0.0;
  int em_iters = 0;
  std::string error;            // non-empty when the method failed
};

// Rows come out in grid order (n, L, r, samples, seed, method) regardless of
// the number of worker threads.
std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec);

// Header: method,n,L,r,samples,seed,trail_error,recovery_error,wall_ms,em_iters
std::string experiment_csv(const std::vector<ExperimentRow>& rows);

// Per (method, n, L, r, samples): counts, medians and quartiles.
std::string experiment_summary_csv(const std::vector<ExperimentRow>& rows);

// Linear-interpolation quantile of an unsorted sample.
double quantile(std::vector<double> values, double q);

// Scenario 1: M^1 <- (1 - lambda) M^1 + lambda M^2.
// Scenario 2: additionally M^3 <- (1 - lambda) M^3 + lambda M^4.
Mixture degenerate_mixture(const Mixture& base, int scenario, double lambda);

struct DegeneratePoint {
  double lambda = 0.0;
  SpectrumSummary summary;
  double sigma_min = 0.0;  // sigma_{2Ln-r}(A) of the interpolated mixture
};

std::vector<DegeneratePoint> degenerate_sweep(int scenario, int n, int L, std::uint64_t seed,
                                              const std::vector<double>& lambdas);

// Header: i,sigma_bar,ratio
std::string spectrum_csv(const SpectrumSummary& summary);

}  // namespace mcmix
