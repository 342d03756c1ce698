#include "mcmix/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include <json.hpp>

#include "mcmix/error.hpp"

namespace mcmix {
namespace {

using nlohmann::json;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix json_matrix(const json& rows, int r, int c, const std::string& what) {
  if (!rows.is_array() || static_cast<int>(rows.size()) != r) {
    throw Error(ErrorKind::Parse, "mixture file: " + what + " must have " + std::to_string(r) + " rows");
  }
  Matrix m(r, c);
  for (int i = 0; i < r; ++i) {
    const json& row = rows[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<int>(row.size()) != c) {
      throw Error(ErrorKind::Parse, "mixture file: row " + std::to_string(i + 1) + " of " + what + " must have " +
                                        std::to_string(c) + " entries");
    }
    for (int j = 0; j < c; ++j) {
      if (!row[static_cast<size_t>(j)].is_number()) {
        throw Error(ErrorKind::Parse, "mixture file: non-numeric entry in " + what);
      }
      m(i, j) = row[static_cast<size_t>(j)].get<double>();
    }
  }
  return m;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream is(line);
  return {std::istream_iterator<std::string>(is), std::istream_iterator<std::string>()};
}

bool parse_int(const std::string& s, long long& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

int parse_state(const std::string& tok, int n, size_t line_no) {
  long long v = 0;
  if (!parse_int(tok, v) || v < 1 || (n > 0 && v > n) || v > (1LL << 30)) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": unknown state '" + tok + "'");
  }
  return static_cast<int>(v - 1);
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string mixture_to_json(const Mixture& mixture) {
  json j;
  j["n"] = mixture.n();
  j["L"] = mixture.L();
  j["start"] = matrix_json(mixture.start());
  json chains = json::array();
  for (const auto& m : mixture.chains()) chains.push_back(matrix_json(m));
  j["chains"] = std::move(chains);
  return j.dump(2) + "\n";
}

Mixture mixture_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("mixture file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("n") || !j.contains("L") || !j.contains("start") || !j.contains("chains")) {
    throw Error(ErrorKind::Parse, "mixture file: expected keys n, L, start, chains");
  }
  if (!j["n"].is_number_integer() || !j["L"].is_number_integer()) {
    throw Error(ErrorKind::Parse, "mixture file: n and L must be integers");
  }
  const int n = j["n"].get<int>();
  const int L = j["L"].get<int>();
  if (n < 1 || L < 1) throw Error(ErrorKind::Parse, "mixture file: n and L must be positive");
  Matrix start = json_matrix(j["start"], L, n, "start");
  const json& cj = j["chains"];
  if (!cj.is_array() || static_cast<int>(cj.size()) != L) {
    throw Error(ErrorKind::Parse, "mixture file: chains must hold L matrices");
  }
  std::vector<Matrix> chains;
  for (int l = 0; l < L; ++l) {
    chains.push_back(json_matrix(cj[static_cast<size_t>(l)], n, n, "chain " + std::to_string(l + 1)));
  }
  return Mixture(std::move(start), std::move(chains));
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string distribution_to_text(const TrailDistribution& dist) {
  std::string out;
  dist.for_each([&](const Trail& t, double p) {
    out += std::to_string(t.i + 1) + " " + std::to_string(t.j + 1) + " " + std::to_string(t.k + 1) + " " +
           format_number(p) + "\n";
  });
  return out;
}

TrailDistribution distribution_from_text(const std::string& text, int n) {
  std::istringstream is(text);
  std::string line;
  size_t line_no = 0;
  std::vector<std::pair<Trail, double>> entries;
  int max_state = -1;
  while (std::getline(is, line)) {
    ++line_no;
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    if (tok.size() != 4) throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 'i j k p'");
    Trail t{parse_state(tok[0], n, line_no), parse_state(tok[1], n, line_no), parse_state(tok[2], n, line_no)};
    double p = 0.0;
    if (!parse_double(tok[3], p) || p < 0.0) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad probability '" + tok[3] + "'");
    }
    max_state = std::max({max_state, t.i, t.j, t.k});
    entries.emplace_back(t, p);
  }
  if (entries.empty()) throw Error(ErrorKind::NoTrails, "no trails");
  const int size = n > 0 ? n : max_state + 1;
  return TrailDistribution::from_weights(size, entries, TrailDistribution::Kind::Exact);
}

std::string trails_to_text(const TrailMultiset& trails) {
  std::string out;
  for (const auto& [t, count] : trails) {
    for (size_t a = 0; a < t.size(); ++a) {
      if (a) out += ' ';
      out += std::to_string(t[a] + 1);
    }
    if (count != 1) out += " x" + std::to_string(count);
    out += '\n';
  }
  return out;
}

ParsedTrails parse_trails(const std::string& text, int n) {
  ParsedTrails out;
  out.max_state = -1;
  std::istringstream is(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    auto tok = split_ws(line);
    if (tok.empty() || tok[0][0] == '#') continue;
    double weight = 1.0;
    if (tok.back().size() > 1 && tok.back()[0] == 'x') {
      if (!parse_double(tok.back().substr(1), weight) || weight < 0.0) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad count '" + tok.back() + "'");
      }
      tok.pop_back();
    }
    std::vector<int> seq;
    seq.reserve(tok.size());
    for (const auto& s : tok) {
      seq.push_back(parse_state(s, n, line_no));
      out.max_state = std::max(out.max_state, seq.back());
    }
    out.sequences.emplace_back(std::move(seq), weight);
  }
  return out;
}

SliceResult slice_text(const std::string& text, SliceMode mode, int n) {
  SliceResult res;
  std::map<Trail, double> weights;
  int size = n;
  if (mode == SliceMode::Window3) {
    const ParsedTrails parsed = parse_trails(text, n);
    if (size <= 0) size = parsed.max_state + 1;
    for (const auto& [seq, w] : parsed.sequences) {
      if (seq.size() < 3) {
        ++res.skipped;
        continue;
      }
      for (size_t a = 0; a + 2 < seq.size(); ++a) weights[Trail{seq[a], seq[a + 1], seq[a + 2]}] += w;
    }
  } else {
    // feature index -> value -> items
    std::map<size_t, std::map<std::string, std::vector<int>>> groups;
    std::istringstream is(text);
    std::string line;
    size_t line_no = 0;
    int max_state = -1;
    while (std::getline(is, line)) {
      ++line_no;
      const auto tok = split_ws(line);
      if (tok.empty() || tok[0][0] == '#') continue;
      const int item = parse_state(tok[0], n, line_no);
      max_state = std::max(max_state, item);
      for (size_t f = 1; f < tok.size(); ++f) {
        if (tok[f] == "?") continue;  // missing value
        groups[f][tok[f]].push_back(item);
      }
    }
    if (size <= 0) size = max_state + 1;
    for (auto& [f, by_value] : groups) {
      for (auto& [value, items] : by_value) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
        for (int a : items) {
          for (int b : items) {
            if (b == a) continue;
            for (int c : items) {
              if (c != a && c != b) weights[Trail{a, b, c}] += 1.0;
            }
          }
        }
      }
    }
  }
  if (res.skipped > 0) res.warnings.push_back(std::to_string(res.skipped) + " sequences shorter than 3 skipped");
  if (weights.empty()) throw Error(ErrorKind::NoTrails, "no trails");
  std::vector<std::pair<Trail, double>> entries(weights.begin(), weights.end());
  double total = 0.0;
  for (const auto& e : entries) total += e.second;
  res.dist = TrailDistribution::from_weights(size, entries, TrailDistribution::Kind::Empirical,
                                             static_cast<std::uint64_t>(std::llround(total)));
  return res;
}

SliceResult slice_sequences(const std::string& path, SliceMode mode, int n) {
  return slice_text(read_text(path), mode, n);
}

std::string report_to_json(const RecoveryReport& report, const std::string& method,
                           std::optional<double> truth_error) {
  json j;
  j["method"] = method;
  j["mixture"] = json::parse(mixture_to_json(report.mixture));
  j["r_used"] = report.r_used;
  j["residual_trail_error"] = report.residual_trail_error;
  j["noisy"] = report.noisy;
  j["repetition"] = report.repetition;
  json classes = json::array();
  for (const auto& c : report.classes.classes) {
    json members = json::array();
    for (int s : c) members.push_back(s + 1);
    classes.push_back(std::move(members));
  }
  j["classes"] = std::move(classes);
  json reps = json::array(), comps = json::array();
  for (int s : report.classes.representatives) reps.push_back(s + 1);
  for (int s : report.classes.companions) comps.push_back(s + 1);
  j["representatives"] = std::move(reps);
  j["companions"] = std::move(comps);
  json assignment = json::array();
  for (int a : report.assignment) assignment.push_back(a + 1);
  j["assignment"] = std::move(assignment);
  j["warnings"] = report.warnings;
  if (truth_error) j["recovery_error"] = *truth_error;
  return j.dump(2) + "\n";
}

}  // namespace mcmix
