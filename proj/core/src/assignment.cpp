#include "mcmix/assignment.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "mcmix/error.hpp"

namespace mcmix {
namespace {

struct Search {
  int r = 0;
  int L = 0;
  std::vector<std::vector<int>> sets;
  std::vector<std::vector<int>> sets_of;  // component -> indices of sets containing it
  std::vector<int> labels;

  bool clashes(int q, int label) const {
    for (int s : sets_of[static_cast<size_t>(q)]) {
      for (int other : sets[static_cast<size_t>(s)]) {
        if (other < q && labels[static_cast<size_t>(other)] == label) return true;
      }
    }
    return false;
  }

  // Forward check: every set must still have enough free labels for its
  // unlabeled members.
  bool feasible_ahead(int q) const {
    for (int s : sets_of[static_cast<size_t>(q)]) {
      const auto& set = sets[static_cast<size_t>(s)];
      std::vector<char> used(static_cast<size_t>(L), 0);
      int open = 0;
      int used_count = 0;
      for (int other : set) {
        if (other <= q) {
          auto& u = used[static_cast<size_t>(labels[static_cast<size_t>(other)])];
          if (!u) ++used_count;
          u = 1;
        } else {
          ++open;
        }
      }
      if (open > L - used_count) return false;
    }
    return true;
  }

  bool exact(int q, int max_label) {
    if (q == r) return true;
    const int limit = std::min(L - 1, max_label + 1);
    for (int label = 0; label <= limit; ++label) {
      if (clashes(q, label)) continue;
      labels[static_cast<size_t>(q)] = label;
      if (feasible_ahead(q) && exact(q + 1, std::max(max_label, label))) return true;
    }
    labels[static_cast<size_t>(q)] = -1;
    return false;
  }

  // Collisions a component adds given the labels of earlier members.
  int added_overlap(int q, int label) const {
    int c = 0;
    for (int s : sets_of[static_cast<size_t>(q)]) {
      for (int other : sets[static_cast<size_t>(s)]) {
        if (other < q && labels[static_cast<size_t>(other)] == label) {
          ++c;
          break;
        }
      }
    }
    return c;
  }

  int best_cost = std::numeric_limits<int>::max();
  std::vector<int> best;

  void least(int q, int max_label, int cost) {
    if (cost >= best_cost) return;
    if (q == r) {
      best_cost = cost;
      best = labels;
      return;
    }
    const int limit = std::min(L - 1, max_label + 1);
    for (int label = 0; label <= limit; ++label) {
      labels[static_cast<size_t>(q)] = label;
      least(q + 1, std::max(max_label, label), cost + added_overlap(q, label));
      if (best_cost == 0) return;
    }
    labels[static_cast<size_t>(q)] = -1;
  }
};

}  // namespace

int assignment_overlap(const std::vector<std::vector<int>>& sets, const std::vector<int>& labels) {
  int total = 0;
  for (const auto& set : sets) {
    std::set<int> distinct;
    for (int q : set) distinct.insert(labels.at(static_cast<size_t>(q)));
    total += static_cast<int>(set.size()) - static_cast<int>(distinct.size());
  }
  return total;
}

std::vector<int> label_assignment(const std::vector<std::vector<int>>& sets, int r, int L,
                                  AssignmentMode mode) {
  if (r < 1 || L < 1) throw Error(ErrorKind::InvalidArgument, "label assignment: need r >= 1 and L >= 1");
  Search s;
  s.r = r;
  s.L = L;
  s.sets_of.assign(static_cast<size_t>(r), {});
  for (const auto& set : sets) {
    std::vector<int> sorted = set;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (int q : sorted) {
      if (q < 0 || q >= r) throw Error(ErrorKind::IndexOutOfRange, "label assignment: component index out of range");
      s.sets_of[static_cast<size_t>(q)].push_back(static_cast<int>(s.sets.size()));
    }
    if (mode == AssignmentMode::Exact && static_cast<int>(sorted.size()) > L) {
      throw Error(ErrorKind::InfeasibleLabeling, "infeasible labeling: a state touches more than L components");
    }
    s.sets.push_back(std::move(sorted));
  }
  s.labels.assign(static_cast<size_t>(r), -1);
  if (mode == AssignmentMode::Exact) {
    if (!s.exact(0, -1)) throw Error(ErrorKind::InfeasibleLabeling, "infeasible labeling");
    return s.labels;
  }
  s.least(0, -1, 0);
  return s.best;
}

}  // namespace mcmix
