// mcmix: generate, sample, recover and evaluate mixtures of Markov chains.

#include <cctype>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mcmix/error.hpp"
#include "mcmix/evaluation.hpp"
#include "mcmix/experiment.hpp"
#include "mcmix/generator.hpp"
#include "mcmix/io.hpp"
#include "mcmix/params.hpp"
#include "mcmix/sampling.hpp"

using json = nlohmann::json;
using namespace mcmix;

namespace {

struct Input {
  TrailDistribution dist;
  std::optional<Mixture> mixture;  // set when the file held a mixture
  std::vector<std::string> warnings;
};

std::string detect_format(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '{') return "mixture";
    break;
  }
  // A distribution line has four fields and a non-integer last one.
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<std::string> tok;
    for (std::string t; ls >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok.size() == 4 && tok[3].find_first_of(".eE") != std::string::npos) return "dist";
    return "trails";
  }
  return "trails";
}

Input load_input(const std::string& path, std::string format, int n) {
  const std::string text = read_text(path);
  if (format == "auto") format = detect_format(text);
  Input in;
  if (format == "mixture") {
    in.mixture = mixture_from_json(text);
    in.dist = exact_trail_distribution(*in.mixture);
  } else if (format == "dist") {
    in.dist = distribution_from_text(text, n);
  } else if (format == "trails" || format == "features") {
    SliceResult s = slice_text(text, format == "trails" ? SliceMode::Window3 : SliceMode::Cooccurrence, n);
    in.dist = std::move(s.dist);
    in.warnings = std::move(s.warnings);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown input format '" + format + "'");
  }
  return in;
}

json vec_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

void emit(const std::string& out, const std::string& text) { write_text(out, text); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn mixtures of Markov chains from 3-trail distributions"};
  app.require_subcommand(1);
  app.fallthrough();
  bool as_json = false;
  app.add_flag("--json", as_json, "Machine-readable JSON on stdout");

  // generate
  GeneratorSpec gen;
  bool no_ensure = false;
  std::string gen_out = "-";
  auto* g = app.add_subcommand("generate", "Random mixture with a given number of components");
  g->add_option("--n", gen.n, "Number of states")->required();
  g->add_option("--L", gen.L, "Number of chains")->required();
  g->add_option("--r", gen.r, "Total connected components (default L)");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--min-component-size", gen.min_component_size, "Smallest allowed component")->capture_default_str();
  g->add_flag("--no-ensure", no_ensure, "Skip the recoverability check");
  g->add_option("-o,--output", gen_out, "Mixture file")->capture_default_str();

  // sample
  std::string sample_in = "-", sample_out = "-", sample_format = "trails";
  std::uint64_t sample_count = 0, sample_seed = 0;
  auto* s = app.add_subcommand("sample", "Sample 3-trails from a mixture");
  s->add_option("mixture", sample_in, "Mixture file ('-' for stdin)");
  s->add_option("--count", sample_count, "Number of trails")->required();
  s->add_option("--seed", sample_seed, "Random seed");
  s->add_option("--format", sample_format, "trails or dist")
      ->check(CLI::IsMember({"trails", "dist"}))
      ->capture_default_str();
  s->add_option("-o,--output", sample_out, "Output file")->capture_default_str();

  // recover
  std::string rec_in = "-", rec_method = "ca-svd", rec_r = "auto", rec_format = "auto", rec_out = "-";
  std::string rec_report, rec_truth;
  int rec_L = 0, rec_n = 0;
  MethodConfig rec_cfg;
  auto* rc = app.add_subcommand("recover", "Learn a mixture from trails, a distribution or a mixture file");
  rc->add_option("input", rec_in, "Input file ('-' for stdin)");
  rc->add_option("--method", rec_method, "ca-svd, gkv-svd, em or ca-svd+em")
      ->check(CLI::IsMember({"ca-svd", "gkv-svd", "em", "ca-svd+em"}))
      ->capture_default_str();
  rc->add_option("--L", rec_L, "Number of chains")->required();
  rc->add_option("--r", rec_r, "Co-kernel dimension: auto or an integer")->capture_default_str();
  rc->add_option("--input-format", rec_format, "auto, mixture, dist, trails or features")
      ->check(CLI::IsMember({"auto", "mixture", "dist", "trails", "features"}))
      ->capture_default_str();
  rc->add_option("--n", rec_n, "Number of states (inferred when 0)");
  rc->add_option("--seed", rec_cfg.seed, "Seed for EM and repetitions");
  rc->add_option("--em-iters", rec_cfg.em_iters, "EM iterations")->capture_default_str();
  rc->add_option("--refine-iters", rec_cfg.refine_iters, "EM iterations after ca-svd")->capture_default_str();
  rc->add_option("--truth", rec_truth, "Ground-truth mixture for the recovery error");
  rc->add_option("--report", rec_report, "Write the JSON report here");
  rc->add_option("-o,--output", rec_out, "Learned mixture file")->capture_default_str();

  // estimate
  std::string est_in = "-", est_what = "L", est_format = "auto";
  int est_L = 0, est_n = 0;
  auto* es = app.add_subcommand("estimate", "Choose L from the spectrum or estimate r");
  es->add_option("input", est_in, "Input file ('-' for stdin)");
  es->add_option("--what", est_what, "L or r")->check(CLI::IsMember({"L", "r"}))->capture_default_str();
  es->add_option("--L", est_L, "Number of chains (needed for r)");
  es->add_option("--input-format", est_format, "auto, mixture, dist, trails or features")
      ->check(CLI::IsMember({"auto", "mixture", "dist", "trails", "features"}))
      ->capture_default_str();
  es->add_option("--n", est_n, "Number of states (inferred when 0)");

  // evaluate
  std::string ev_a, ev_b, ev_format_a = "auto", ev_format_b = "auto";
  auto* ev = app.add_subcommand("evaluate", "Compare two mixtures or distributions");
  ev->add_option("first", ev_a, "Reference file")->required();
  ev->add_option("second", ev_b, "Learned file")->required();
  ev->add_option("--format-first", ev_format_a, "Format of the first file")->capture_default_str();
  ev->add_option("--format-second", ev_format_b, "Format of the second file")->capture_default_str();

  // experiment
  std::string ex_spec, ex_out, ex_summary;
  auto* ex = app.add_subcommand("experiment", "Run a grid of synthetic experiments");
  ex->add_option("spec", ex_spec, "Experiment spec (JSON)")->required();
  ex->add_option("-o,--output", ex_out, "CSV output (overrides the output field of the grid file)");
  ex->add_option("--summary", ex_summary, "Per-cell summary CSV");

  // degenerate
  int dg_scenario = 1, dg_n = 20, dg_L = 5;
  std::uint64_t dg_seed = 0;
  std::vector<double> dg_lambda;
  std::string dg_out = "-";
  auto* dg = app.add_subcommand("degenerate", "Spectra of mixtures with chains pulled together");
  dg->add_option("--scenario", dg_scenario, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
  dg->add_option("--n", dg_n, "Number of states")->capture_default_str();
  dg->add_option("--L", dg_L, "Number of chains")->capture_default_str();
  dg->add_option("--seed", dg_seed, "Random seed");
  dg->add_option("--lambda", dg_lambda, "Interpolation weights (default 0, 0.1, ..., 1)");
  dg->add_option("-o,--output", dg_out, "CSV output")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*g) {
      if (gen.r == 0) gen.r = gen.L;
      gen.ensure_recoverable = !no_ensure;
      emit(gen_out, mixture_to_json(generate_mixture(gen)));
    } else if (*s) {
      const Mixture mix = mixture_from_json(read_text(sample_in));
      if (sample_format == "dist") {
        emit(sample_out, distribution_to_text(sample_distribution(mix, sample_count, sample_seed)));
      } else {
        emit(sample_out, trails_to_text(sample_trails(mix, sample_count, sample_seed)));
      }
    } else if (*rc) {
      if (rec_r != "auto") {
        try {
          size_t used = 0;
          rec_cfg.r = std::stoi(rec_r, &used);
          if (used != rec_r.size()) throw std::invalid_argument(rec_r);
        } catch (const std::exception&) {
          throw Error(ErrorKind::InvalidArgument, "--r expects 'auto' or an integer, got '" + rec_r + "'");
        }
      }
      const Input in = load_input(rec_in, rec_format, rec_n);
      MethodResult res = run_method(rec_method, in.dist, rec_L, rec_cfg);
      std::optional<double> err;
      if (!rec_truth.empty()) err = recovery_error(mixture_from_json(read_text(rec_truth)), res.mixture).value;
      const double residual = trail_error(in.dist, exact_trail_distribution(res.mixture));
      json report;
      if (res.report) {
        RecoveryReport rep = *res.report;
        rep.mixture = res.mixture;
        rep.residual_trail_error = residual;
        report = json::parse(report_to_json(rep, rec_method, err));
      } else {
        report["method"] = rec_method;
        report["mixture"] = json::parse(mixture_to_json(res.mixture));
        report["residual_trail_error"] = residual;
        if (err) report["recovery_error"] = *err;
      }
      report["em_iters"] = res.em_iters;
      for (const auto& w : in.warnings) report["warnings"].push_back(w);
      for (const auto& w : res.warnings) {
        if (!res.report) report["warnings"].push_back(w);
      }
      if (!report.contains("warnings")) report["warnings"] = json::array();
      if (!rec_report.empty()) write_text(rec_report, report.dump(2) + "\n");
      if (as_json) {
        if (rec_out != "-") write_text(rec_out, mixture_to_json(res.mixture));
        std::cout << report.dump(2) << "\n";
      } else {
        emit(rec_out, mixture_to_json(res.mixture));
        for (const auto& w : report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
        if (err) std::cerr << "recovery-error " << format_number(*err) << "\n";
      }
    } else if (*es) {
      const Input in = load_input(est_in, est_format, est_n);
      if (est_what == "L") {
        const SpectrumSummary sum = spectrum_summary(in.dist);
        if (as_json) {
          json j{{"chosen_L", sum.chosen_L}, {"sigma_bar", vec_json(sum.sigma_bar)}, {"ratios", vec_json(sum.ratios)}};
          std::cout << j.dump(2) << "\n";
        } else {
          std::cout << sum.chosen_L << "\n";
        }
      } else {
        if (est_L < 1) throw Error(ErrorKind::InvalidArgument, "--what r needs --L");
        const RankEstimate est = estimate_r(in.dist, est_L);
        if (as_json) {
          json j{{"r_hat", est.r_hat}, {"gap_ratio", est.gap_ratio}, {"svals", vec_json(est.svals)},
                 {"warnings", est.warnings}};
          std::cout << j.dump(2) << "\n";
        } else {
          std::cout << est.r_hat << "\n";
          for (const auto& w : est.warnings) std::cerr << "warning: " << w << "\n";
        }
      }
    } else if (*ev) {
      const Input a = load_input(ev_a, ev_format_a, 0);
      const Input b = load_input(ev_b, ev_format_b, a.dist.n());
      json j;
      if (a.mixture && b.mixture) {
        const RecoveryError re = recovery_error(*a.mixture, *b.mixture);
        json perm = json::array();
        for (int p : re.match.permutation) perm.push_back(p + 1);
        j["recovery_error"] = re.value;
        j["start_tv"] = re.start_tv;
        j["permutation"] = perm;
      }
      j["trail_error"] = trail_error(a.dist, b.dist);
      if (as_json) {
        std::cout << j.dump(2) << "\n";
      } else {
        for (const auto& [k, v] : j.items()) {
          if (v.is_number()) std::cout << k << " " << format_number(v.get<double>()) << "\n";
        }
      }
    } else if (*ex) {
      ExperimentSpec spec = experiment_spec_from_json(read_text(ex_spec));
      if (!ex_out.empty()) spec.output = ex_out;
      const auto rows = run_experiment(spec);
      if (!ex_summary.empty()) write_text(ex_summary, experiment_summary_csv(rows));
      if (as_json) {
        json arr = json::array();
        for (const auto& r : rows) {
          json o{{"method", r.method}, {"n", r.n}, {"L", r.L}, {"r", r.r}, {"samples", r.samples},
                 {"seed", r.seed}, {"trail_error", r.trail_error}, {"recovery_error", r.recovery_error},
                 {"wall_ms", r.wall_ms}, {"em_iters", r.em_iters}};
          if (!r.error.empty()) o["error"] = r.error;
          arr.push_back(std::move(o));
        }
        if (!spec.output.empty() && spec.output != "-") write_text(spec.output, experiment_csv(rows));
        std::cout << arr.dump(2) << "\n";
      } else {
        emit(spec.output.empty() ? "-" : spec.output, experiment_csv(rows));
      }
    } else if (*dg) {
      if (dg_lambda.empty()) {
        for (int k = 0; k <= 10; ++k) dg_lambda.push_back(k / 10.0);
      }
      const auto points = degenerate_sweep(dg_scenario, dg_n, dg_L, dg_seed, dg_lambda);
      if (as_json) {
        json arr = json::array();
        for (const auto& p : points) {
          arr.push_back({{"lambda", p.lambda},
                         {"chosen_L", p.summary.chosen_L},
                         {"sigma_min", p.sigma_min},
                         {"sigma_bar", vec_json(p.summary.sigma_bar)},
                         {"ratios", vec_json(p.summary.ratios)}});
        }
        std::cout << arr.dump(2) << "\n";
      } else {
        std::string csv = "lambda,chosen_L,sigma_min,i,sigma_bar,ratio\n";
        for (const auto& p : points) {
          const auto& sb = p.summary.sigma_bar;
          for (Eigen::Index i = 0; i < sb.size(); ++i) {
            csv += format_number(p.lambda) + "," + std::to_string(p.summary.chosen_L) + "," +
                   format_number(p.sigma_min) + "," + std::to_string(i + 1) + "," + format_number(sb(i)) + "," +
                   (i < p.summary.ratios.size() ? format_number(p.summary.ratios(i)) : std::string()) + "\n";
          }
        }
        emit(dg_out, csv);
      }
    }
  } catch (const Error& e) {
    if (as_json) std::cout << json{{"error", e.what()}}.dump() << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    if (as_json) std::cout << json{{"error", e.what()}}.dump() << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
