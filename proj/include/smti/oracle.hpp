#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "smti/audit.hpp"
#include "smti/core.hpp"

// Exhaustive ground truth on small instances: enumerate every
// capacity-feasible edge subset, keep the stable ones, and report the largest.
// Stability is checked definition-directly; no solver code is trusted here.

namespace smti {

class SizeLimitExceeded : public std::runtime_error {
 public:
  SizeLimitExceeded(std::size_t edges, std::size_t limit)
      : std::runtime_error("oracle: instance has " + std::to_string(edges) +
                           " edges, limit is " + std::to_string(limit)),
        edges(edges),
        limit(limit) {}
  std::size_t edges, limit;
};

struct OracleResult {
  int opt_size = 0;
  Matching witness;          // lexicographically smallest among the largest
  std::uint64_t stable_count = 0;
  std::uint64_t explored = 0;  // capacity-feasible subsets examined
};

namespace detail {

class OracleEnumerator {
 public:
  explicit OracleEnumerator(const Instance& inst) : inst_(inst) {
    degl_.assign(inst.n_left(), 0);
    degr_.assign(inst.n_right(), 0);
    // Worst (max) rank currently matched, per agent; small capacities make a
    // plain recompute-on-pop cheap, so we track matched ranks as stacks.
    ranksl_.resize(inst.n_left());
    ranksr_.resize(inst.n_right());
    capl_.resize(inst.n_left());
    capr_.resize(inst.n_right());
    for (int u = 0; u < inst.n_left(); ++u) capl_[u] = inst.capacity(Side::LeftU, u);
    for (int w = 0; w < inst.n_right(); ++w) capr_[w] = inst.capacity(Side::RightW, w);
  }

  OracleResult run() {
    recurse(0);
    OracleResult r;
    r.opt_size = best_size_;
    r.witness = Matching(best_);
    r.stable_count = stable_count_;
    r.explored = explored_;
    return r;
  }

 private:
  void recurse(std::size_t i) {
    if (i == inst_.edges().size()) {
      ++explored_;
      if (!is_stable_leaf()) return;
      ++stable_count_;
      int sz = static_cast<int>(chosen_.size());
      if (sz < best_size_) return;
      auto sorted = chosen_;
      std::sort(sorted.begin(), sorted.end());
      if (sz > best_size_ || sorted < best_) {
        best_size_ = sz;
        best_ = std::move(sorted);
      }
      return;
    }
    const auto& e = inst_.edges()[i];
    recurse(i + 1);
    if (degl_[e.left] < capl_[e.left] && degr_[e.right] < capr_[e.right]) {
      ++degl_[e.left];
      ++degr_[e.right];
      ranksl_[e.left].push_back(e.rank_left);
      ranksr_[e.right].push_back(e.rank_right);
      chosen_.emplace_back(e.left, e.right);
      in_.push_back(i);
      recurse(i + 1);
      in_.pop_back();
      chosen_.pop_back();
      ranksl_[e.left].pop_back();
      ranksr_[e.right].pop_back();
      --degl_[e.left];
      --degr_[e.right];
    }
  }

  bool is_stable_leaf() const {
    std::size_t next_in = 0;
    for (std::size_t i = 0; i < inst_.edges().size(); ++i) {
      if (next_in < in_.size() && in_[next_in] == i) {
        ++next_in;
        continue;
      }
      const auto& e = inst_.edges()[i];
      bool u_wants = degl_[e.left] < capl_[e.left] ||
                     worst(ranksl_[e.left]) > e.rank_left;
      if (!u_wants) continue;
      bool w_wants = degr_[e.right] < capr_[e.right] ||
                     worst(ranksr_[e.right]) > e.rank_right;
      if (w_wants) return false;
    }
    return true;
  }

  static int worst(const std::vector<int>& ranks) {
    int m = -1;
    for (int r : ranks) m = std::max(m, r);
    return m;
  }

  const Instance& inst_;
  std::vector<int> degl_, degr_, capl_, capr_;
  std::vector<std::vector<int>> ranksl_, ranksr_;
  std::vector<std::pair<int, int>> chosen_, best_;
  std::vector<std::size_t> in_;
  int best_size_ = -1;
  std::uint64_t stable_count_ = 0, explored_ = 0;
};

}  // namespace detail

inline constexpr std::size_t kDefaultEdgeBudget = 20;

// Exact maximum stable matching / b-matching by exhaustive enumeration.
// The recursion only ever builds capacity-feasible subsets; `explored` counts
// them. Correctness never depends on that pruning — see
// optimal_stable_unpruned below.
inline OracleResult optimal_stable(const Instance& inst,
                                   std::size_t edge_budget = kDefaultEdgeBudget) {
  if (inst.num_edges() > edge_budget)
    throw SizeLimitExceeded(inst.num_edges(), edge_budget);
  detail::OracleEnumerator e(inst);
  return e.run();
}

// Meta-verification path: walk all 2^|E| bitmasks with no pruning at all and
// filter for feasibility, then stability via the audit module. Tiny instances
// only.
inline OracleResult optimal_stable_unpruned(const Instance& inst,
                                            std::size_t edge_budget = kDefaultEdgeBudget) {
  if (inst.num_edges() > edge_budget)
    throw SizeLimitExceeded(inst.num_edges(), edge_budget);
  const std::size_t n = inst.num_edges();
  OracleResult r;
  r.opt_size = -1;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::vector<std::pair<int, int>> edges;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) edges.emplace_back(inst.edges()[i].left, inst.edges()[i].right);
    Matching m(std::move(edges));
    if (!is_valid_matching(inst, m)) continue;
    ++r.explored;
    if (!find_blocking_pairs(inst, m).empty()) continue;
    ++r.stable_count;
    int sz = static_cast<int>(m.size());
    if (sz > r.opt_size ||
        (sz == r.opt_size && m.edges() < r.witness.edges())) {
      r.opt_size = sz;
      r.witness = std::move(m);
    }
  }
  if (r.opt_size < 0) r.opt_size = 0;
  return r;
}

// 2 |M_opt| <= 3 |M| in exact integer arithmetic.
inline bool ratio_check(const Instance&, const Matching& m,
                        const OracleResult& oracle) {
  return 2 * oracle.opt_size <= 3 * static_cast<int>(m.size());
}

}  // namespace smti
