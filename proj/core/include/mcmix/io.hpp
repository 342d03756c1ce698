#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mcmix/mixture.hpp"
#include "mcmix/sampling.hpp"
#include "mcmix/spectral.hpp"
#include "mcmix/trail_distribution.hpp"

namespace mcmix {

// Mixture JSON: {"n": .., "L": .., "start": [[..]], "chains": [[[..]]]}.
std::string mixture_to_json(const Mixture& mixture);
Mixture mixture_from_json(const std::string& text);

// Reads a whole file, or standard input for "-".
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// Distribution file: one "i j k p" line per positive entry, 1-indexed.
std::string distribution_to_text(const TrailDistribution& dist);
// n = 0 infers n from the largest state id.
TrailDistribution distribution_from_text(const std::string& text, int n = 0);

// Trail file: space-separated 1-indexed states, optional trailing "x<count>".
std::string trails_to_text(const TrailMultiset& trails);

struct ParsedTrails {
  std::vector<std::pair<std::vector<int>, double>> sequences;  // 0-indexed states, weight
  int max_state = 0;                                           // largest 0-indexed id seen, -1 if none
};
ParsedTrails parse_trails(const std::string& text, int n = 0);

enum class SliceMode { Window3, Cooccurrence };

struct SliceResult {
  TrailDistribution dist;
  std::uint64_t skipped = 0;  // sequences shorter than 3
  std::vector<std::string> warnings;
};

// Window3 reads a trail file and emits every contiguous window of length 3,
// weighted by the line count. Cooccurrence reads a feature table ("item v1
// v2 ..." per line) and emits, per feature, every ordered triple of
// pairwise distinct items sharing that feature's value.
SliceResult slice_text(const std::string& text, SliceMode mode, int n = 0);
SliceResult slice_sequences(const std::string& path, SliceMode mode, int n = 0);

// Report JSON with the mixture embedded; truth_error is included when given.
std::string report_to_json(const RecoveryReport& report, const std::string& method,
                           std::optional<double> truth_error = std::nullopt);

// 17 significant digits.
std::string format_number(double x);

}  // namespace mcmix
