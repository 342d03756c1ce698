#pragma once

#include <vector>

namespace mcmix {

enum class AssignmentMode { Exact, LeastOverlap };

// Labels components [0, r) with chains [0, L). Each entry of sets is the
// component set C(j) of one representative.
//
// Exact: every set must receive pairwise distinct labels. Returns the
// lexicographically smallest such labeling among those where each new label
// is the smallest unused one, or throws Error(InfeasibleLabeling).
//
// LeastOverlap: minimizes sum_j (|C(j)| - #distinct labels in C(j)) by
// branch and bound; ties go to the lexicographically smallest labeling.
std::vector<int> label_assignment(const std::vector<std::vector<int>>& sets, int r, int L,
                                  AssignmentMode mode);

// Number of (set, label) collisions of a labeling, the LeastOverlap objective.
int assignment_overlap(const std::vector<std::vector<int>>& sets, const std::vector<int>& labels);

}  // namespace mcmix
