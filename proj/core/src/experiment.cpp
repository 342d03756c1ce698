#include "mcmix/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <random>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "mcmix/em.hpp"
#include "mcmix/error.hpp"
#include "mcmix/evaluation.hpp"
#include "mcmix/generator.hpp"
#include "mcmix/io.hpp"
#include "mcmix/sampling.hpp"
#include "mcmix/spectral.hpp"

namespace mcmix {
namespace {

using nlohmann::json;

template <typename T>
std::vector<T> grid_field(const json& j, const char* key, bool required) {
  std::vector<T> out;
  if (!j.contains(key)) {
    if (required) throw Error(ErrorKind::Parse, std::string("experiment spec: missing '") + key + "'");
    return out;
  }
  const json& v = j[key];
  try {
    if (v.is_array()) {
      for (const auto& x : v) out.push_back(x.get<T>());
    } else {
      out.push_back(v.get<T>());
    }
  } catch (const json::exception&) {
    throw Error(ErrorKind::Parse, std::string("experiment spec: bad value for '") + key + "'");
  }
  return out;
}

}  // namespace

bool is_known_method(const std::string& method) {
  return method == "ca-svd" || method == "gkv-svd" || method == "em" || method == "ca-svd+em";
}

MethodResult run_method(const std::string& method, const TrailDistribution& dist, int L, const MethodConfig& cfg) {
  MethodResult res;
  RecoveryOptions options;
  options.seed = cfg.seed;
  if (method == "ca-svd" || method == "ca-svd+em") {
    RecoveryReport rep = ca_svd(dist, L, cfg.r, options);
    res.mixture = rep.mixture;
    res.warnings = rep.warnings;
    res.report = std::move(rep);
    if (method == "ca-svd+em" && cfg.refine_iters > 0) {
      EmConfig em;
      em.max_iters = cfg.refine_iters;
      em.tol = 0.0;
      em.warm = res.mixture;
      EmResult fit = em_fit(dist, L, em);
      res.mixture = std::move(fit.mixture);
      res.em_iters = fit.iterations;
    }
  } else if (method == "gkv-svd") {
    RecoveryReport rep = gkv_svd(dist, L, options);
    res.mixture = rep.mixture;
    res.warnings = rep.warnings;
    res.report = std::move(rep);
  } else if (method == "em") {
    EmConfig em;
    em.max_iters = cfg.em_iters;
    em.seed = cfg.seed;
    EmResult fit = em_fit(dist, L, em);
    res.mixture = std::move(fit.mixture);
    res.em_iters = fit.iterations;
    res.warnings = std::move(fit.warnings);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown method '" + method + "'");
  }
  return res;
}

ExperimentSpec experiment_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("experiment spec: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::Parse, "experiment spec: expected a JSON object");
  ExperimentSpec s;
  s.n = grid_field<int>(j, "n", true);
  s.L = grid_field<int>(j, "L", true);
  s.r = grid_field<int>(j, "r", false);
  s.samples = grid_field<std::uint64_t>(j, "samples", false);
  if (s.samples.empty()) s.samples.push_back(0);
  s.methods = grid_field<std::string>(j, "methods", false);
  if (s.methods.empty()) s.methods = {"ca-svd", "gkv-svd", "em", "ca-svd+em"};
  for (const auto& m : s.methods) {
    if (!is_known_method(m)) throw Error(ErrorKind::Parse, "experiment spec: unknown method '" + m + "'");
  }
  s.seeds = grid_field<std::uint64_t>(j, "seeds", false);
  if (s.seeds.empty()) {
    const int repeats = j.value("repeats", 1);
    if (repeats < 1) throw Error(ErrorKind::Parse, "experiment spec: repeats must be at least 1");
    for (int k = 0; k < repeats; ++k) s.seeds.push_back(static_cast<std::uint64_t>(k));
  }
  s.em_iters = j.value("em_iters", 100);
  s.refine_iters = j.value("refine_iters", 5);
  s.known_r = j.value("known_r", false);
  s.output = j.value("output", std::string());
  return s;
}

std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec) {
  struct Job {
    int n, L, r;
    std::uint64_t samples, seed;
  };
  std::vector<Job> jobs;
  for (int n : spec.n) {
    for (int L : spec.L) {
      std::vector<int> rs = spec.r.empty() ? std::vector<int>{L} : spec.r;
      for (int r : rs) {
        if (r < L || n < 2 * L) continue;
        for (auto samples : spec.samples) {
          for (auto seed : spec.seeds) jobs.push_back({n, L, r, samples, seed});
        }
      }
    }
  }
  std::vector<std::vector<ExperimentRow>> out(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t idx = next++; idx < jobs.size(); idx = next++) {
      const Job& job = jobs[idx];
      auto& rows = out[idx];
      auto base = [&](const std::string& method) {
        ExperimentRow row;
        row.method = method;
        row.n = job.n;
        row.L = job.L;
        row.r = job.r;
        row.samples = job.samples;
        row.seed = job.seed;
        return row;
      };
      Mixture truth;
      TrailDistribution input;
      try {
        truth = generate_mixture(GeneratorSpec{job.n, job.L, job.r, job.seed, true, 2});
        input = job.samples == 0 ? exact_trail_distribution(truth) : sample_distribution(truth, job.samples, job.seed);
      } catch (const Error& e) {
        for (const auto& m : spec.methods) {
          ExperimentRow row = base(m);
          row.error = e.what();
          rows.push_back(std::move(row));
        }
        continue;
      }
      for (const auto& m : spec.methods) {
        ExperimentRow row = base(m);
        MethodConfig cfg;
        cfg.seed = job.seed;
        cfg.em_iters = spec.em_iters;
        cfg.refine_iters = spec.refine_iters;
        if (spec.known_r) cfg.r = job.r;
        const auto t0 = std::chrono::steady_clock::now();
        try {
          MethodResult res = run_method(m, input, job.L, cfg);
          row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          row.em_iters = res.em_iters;
          row.trail_error = trail_error(input, exact_trail_distribution(res.mixture));
          row.recovery_error = recovery_error(truth, res.mixture).value;
        } catch (const Error& e) {
          row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
          row.error = e.what();
          row.trail_error = std::nan("");
          row.recovery_error = std::nan("");
        }
        rows.push_back(std::move(row));
      }
    }
  };
  const int threads = std::max(1, std::min<int>(worker_threads(), static_cast<int>(jobs.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  std::vector<ExperimentRow> rows;
  for (auto& part : out) {
    for (auto& row : part) rows.push_back(std::move(row));
  }
  return rows;
}

std::string experiment_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "method,n,L,r,samples,seed,trail_error,recovery_error,wall_ms,em_iters\n";
  for (const auto& row : rows) {
    out += row.method + "," + std::to_string(row.n) + "," + std::to_string(row.L) + "," + std::to_string(row.r) +
           "," + std::to_string(row.samples) + "," + std::to_string(row.seed) + "," +
           format_number(row.trail_error) + "," + format_number(row.recovery_error) + "," +
           format_number(row.wall_ms) + "," + std::to_string(row.em_iters) + "\n";
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = static_cast<size_t>(std::ceil(pos));
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::string experiment_summary_csv(const std::vector<ExperimentRow>& rows) {
  using Key = std::tuple<int, int, int, std::uint64_t, std::string>;
  std::map<Key, std::vector<const ExperimentRow*>> groups;
  std::vector<Key> order;
  for (const auto& row : rows) {
    Key k{row.n, row.L, row.r, row.samples, row.method};
    if (!groups.count(k)) order.push_back(k);
    groups[k].push_back(&row);
  }
  std::string out =
      "method,n,L,r,samples,runs,failures,median_trail_error,q25_trail_error,q75_trail_error,"
      "median_recovery_error,q25_recovery_error,q75_recovery_error,median_wall_ms\n";
  for (const auto& k : order) {
    const auto& g = groups[k];
    std::vector<double> te, re, ms;
    int failures = 0;
    for (const auto* row : g) {
      if (!row->error.empty()) {
        ++failures;
        continue;
      }
      te.push_back(row->trail_error);
      re.push_back(row->recovery_error);
      ms.push_back(row->wall_ms);
    }
    out += std::get<4>(k) + "," + std::to_string(std::get<0>(k)) + "," + std::to_string(std::get<1>(k)) + "," +
           std::to_string(std::get<2>(k)) + "," + std::to_string(std::get<3>(k)) + "," + std::to_string(g.size()) +
           "," + std::to_string(failures) + "," + format_number(quantile(te, 0.5)) + "," +
           format_number(quantile(te, 0.25)) + "," + format_number(quantile(te, 0.75)) + "," +
           format_number(quantile(re, 0.5)) + "," + format_number(quantile(re, 0.25)) + "," +
           format_number(quantile(re, 0.75)) + "," + format_number(quantile(ms, 0.5)) + "\n";
  }
  return out;
}

Mixture degenerate_mixture(const Mixture& base, int scenario, double lambda) {
  if (scenario != 1 && scenario != 2) throw Error(ErrorKind::InvalidArgument, "degenerate: scenario must be 1 or 2");
  const int need = scenario == 1 ? 2 : 4;
  if (base.L() < need) {
    throw Error(ErrorKind::InvalidArgument, "degenerate: scenario " + std::to_string(scenario) + " needs L >= " +
                                                std::to_string(need));
  }
  if (lambda < 0.0 || lambda > 1.0) throw Error(ErrorKind::InvalidArgument, "degenerate: lambda must be in [0, 1]");
  std::vector<Matrix> chains = base.chains();
  chains[0] = (1.0 - lambda) * base.chain(0) + lambda * base.chain(1);
  if (scenario == 2) chains[2] = (1.0 - lambda) * base.chain(2) + lambda * base.chain(3);
  return Mixture(base.start(), std::move(chains));
}

std::vector<DegeneratePoint> degenerate_sweep(int scenario, int n, int L, std::uint64_t seed,
                                              const std::vector<double>& lambdas) {
  std::mt19937_64 rng(seed);
  const Mixture base = random_mixture(n, L, rng);
  std::vector<DegeneratePoint> out;
  for (double lambda : lambdas) {
    const Mixture m = degenerate_mixture(base, scenario, lambda);
    DegeneratePoint p;
    p.lambda = lambda;
    p.summary = spectrum_summary(exact_trail_distribution(m));
    p.sigma_min = smallest_nonzero_shuffle_sigma(m);
    out.push_back(std::move(p));
  }
  return out;
}

std::string spectrum_csv(const SpectrumSummary& summary) {
  std::string out = "i,sigma_bar,ratio\n";
  for (Eigen::Index i = 0; i < summary.sigma_bar.size(); ++i) {
    out += std::to_string(i + 1) + "," + format_number(summary.sigma_bar(i)) + "," +
           (i < summary.ratios.size() ? format_number(summary.ratios(i)) : std::string()) + "\n";
  }
  return out;
}

}  // namespace mcmix
