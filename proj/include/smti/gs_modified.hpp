#pragma once

#include <cassert>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "smti/core.hpp"
#include "smti/rng.hpp"
#include "smti/solver_types.hpp"

// One-to-one engine: linear-time 3/2-approximation for maximum-cardinality
// stable matchings with ties and incomplete lists.
//
// Proposal lists L_m are per-tie doubly-linked lists over the instance
// adjacency. "Remove w from L_m" unlinks her node; a special edge keeps its
// node so the proposer scans it a second time. Within each tie free women are
// proposed to before matched ones; matched nodes drifting at a tie front are
// lazily pushed to the tie tail (each node moves at most once after its woman
// is matched, so the whole run stays O(m)).
//
// Trace notes: for InsecureSwap events the `special` and `becomes_insecure`
// fields describe the satellite edge (u2, w2); the proposal edge (u, w) is
// never special there since w is matched.

namespace smti {
namespace detail {

class GsModifiedSolver {
  struct Node {
    int next, prev;
    Node() {}  // deliberately uninitialized; every field is written when the
               // position is first linked into its tie list
  };
  struct Tie {
    int head, tail;
  };
  struct WState {
    int partner, tie, rank;  // tie: on her partner's list; rank: hers for him
    std::uint8_t matched_ever;
  };

 public:
  GsModifiedSolver(const Instance& inst, const SolveOptions& opt)
      : inst_(inst), opt_(opt), sched_(opt.policy, opt.seed, opt.script) {
    const int nl = inst.n_left(), nr = inst.n_right();
    // All per-(man, position) and per-(man, tie) state lives in flat arrays
    // behind prefix-sum bases; the nested-vector layout costs millions of
    // small allocations at large n and its scattered nodes dominate the wall
    // time there.
    pos_base_.resize(nl + 1, 0);
    tie_base_.resize(nl + 1, 0);
    for (int m = 0; m < nl; ++m) {
      const auto& adj = inst.adjacency(Side::LeftU, m);
      pos_base_[m + 1] = pos_base_[m] + static_cast<int>(adj.size());
      // Entries run in preference order, so the last tie index gives the tie
      // count without touching the nested preference lists.
      tie_base_[m + 1] = tie_base_[m] + (adj.empty() ? 0 : adj.back().tie + 1);
    }
    const int total_pos = pos_base_[nl], total_ties = tie_base_[nl];
    nodes_.resize(total_pos);
    ties_.assign(total_ties, Tie{-1, -1});
    free_cnt_.assign(total_ties, 0);
    first_tie_.resize(nl, 0);
    l_remaining_.resize(nl, 0);
    lprime_.resize(nl);
    lprime_head_.resize(nl, 0);
    subsat_.resize(nl, 0);
    partner_of_m_.assign(nl, -1);
    wstate_.assign(nr, WState{-1, -1, -1, 0});
    counters_.l_scans.assign(inst.num_edges(), 0);
    counters_.lprime_scans.assign(inst.num_edges(), 0);

    SplitMix64 rng(opt.seed);
    std::vector<int> order;
    for (int m = 0; m < nl; ++m) {
      const auto& adj = inst.adjacency(Side::LeftU, m);
      const int deg = pos_base_[m + 1] - pos_base_[m];
      l_remaining_[m] = deg;
      subsat_[m] = deg;
      // Link positions tie by tie, breaking ties with the seed stream
      // (seed 0 keeps the input order). Tie boundaries come from the
      // adjacency entries, which sit in one contiguous run per man.
      int begin = 0;
      while (begin < deg) {
        const int t = adj[begin].tie;
        int end = begin + 1;
        while (end < deg && adj[end].tie == t) ++end;
        const int len = end - begin;
        set_free_cnt(tie_base_[m] + t, len);
        order.resize(len);
        for (int i = 0; i < len; ++i) order[i] = begin + i;
        if (opt.seed != 0 && len > 1) rng.shuffle(order);
        for (int p : order) link_back(m, t, p);
        begin = end;
      }
    }
    for (int m = nl - 1; m >= 0; --m) sched_.push(m);
  }

  SolveResult run() {
    auto runnable = [this](int m) {
      return partner_of_m_[m] < 0 &&
             (l_remaining_[m] > 0 ||
              lprime_head_[m] < static_cast<int>(lprime_[m].size()));
    };
    int m;
    while ((m = sched_.next(runnable)) >= 0) {
      if (l_remaining_[m] > 0)
        propose_from_l(m);
      else
        propose_from_lprime(m);
      if (runnable(m)) sched_.push(m);
    }
    SolveResult res;
    std::vector<std::pair<int, int>> edges;
    for (int u = 0; u < inst_.n_left(); ++u)
      if (partner_of_m_[u] >= 0) edges.emplace_back(u, partner_of_m_[u]);
    res.matching = Matching(std::move(edges));
    res.counters = std::move(counters_);
    res.trace = std::move(trace_);
    return res;
  }

 private:
  Node& node(int m, int p) { return nodes_[pos_base_[m] + p]; }
  Tie& tie(int m, int t) { return ties_[tie_base_[m] + t]; }
  const Tie& tie(int m, int t) const { return ties_[tie_base_[m] + t]; }
  // Free counts live in one byte per tie so the hot array stays cache
  // resident; the rare tie longer than 254 is tracked exactly in a side map.
  static constexpr std::uint8_t kBigTie = 255;
  void set_free_cnt(int idx, int len) {
    if (len >= kBigTie) {
      free_cnt_[idx] = kBigTie;
      big_free_[idx] = len;
    } else {
      free_cnt_[idx] = static_cast<std::uint8_t>(len);
    }
  }
  void dec_free_cnt(int idx) {
    if (free_cnt_[idx] == kBigTie) {
      if (--big_free_[idx] < kBigTie) {
        free_cnt_[idx] = static_cast<std::uint8_t>(big_free_[idx]);
        big_free_.erase(idx);
      }
    } else {
      --free_cnt_[idx];
    }
  }
  int free_cnt(int m, int t) const {
    const int idx = tie_base_[m] + t;
    return free_cnt_[idx] == kBigTie ? big_free_.at(idx) : free_cnt_[idx];
  }

  void link_back(int m, int t, int p) {
    Tie& tt = tie(m, t);
    node(m, p).prev = tt.tail;
    node(m, p).next = -1;
    if (tt.tail >= 0)
      node(m, tt.tail).next = p;
    else
      tt.head = p;
    tt.tail = p;
  }

  void unlink(int m, int p) {
    int t = inst_.adjacency(Side::LeftU, m)[p].tie;
    Tie& tt = tie(m, t);
    int pr = node(m, p).prev, nx = node(m, p).next;
    (pr >= 0 ? node(m, pr).next : tt.head) = nx;
    (nx >= 0 ? node(m, nx).prev : tt.tail) = pr;
  }

  void remove_node(int m, int p) {
    unlink(m, p);
    --l_remaining_[m];
  }

  void move_to_tie_end(int m, int p) {
    int t = inst_.adjacency(Side::LeftU, m)[p].tie;
    if (tie(m, t).tail == p) return;
    unlink(m, p);
    link_back(m, t, p);
  }

  // First free woman in tie t of L_m; matched nodes drifting in front of her
  // are pushed to the tie tail on the way. Requires free_count_[m][t] > 0.
  int first_free_node(int m, int t) {
    int p = tie(m, t).head;
    while (p >= 0) {
      int w = inst_.adjacency(Side::LeftU, m)[p].partner;
      if (wstate_[w].partner < 0) return p;
      int q = node(m, p).next;
      move_to_tie_end(m, p);
      p = q;
    }
    assert(false && "free_count says a free woman exists in this tie");
    return -1;
  }

  bool insecure(int w) const {
    const WState& s = wstate_[w];
    return s.partner >= 0 && free_cnt(s.partner, s.tie) >= 1;
  }

  bool subsatellitic(int m) const { return subsat_[m] > 0; }

  // First-ever match of w: she leaves the free pool, so every incident tie
  // loses a free member. Her drift behind the free members of each tie
  // happens lazily in first_free_node instead of eagerly here; the scan skips
  // matched nodes anyway, so the free-women-first order is identical, and
  // skipping the eager relinking saves several random memory touches per
  // edge (each node still moves at most once, keeping the run O(m)).
  void on_first_match(int w) {
    wstate_[w].matched_ever = 1;
    for (const auto& ent : inst_.adjacency(Side::RightW, w)) {
      dec_free_cnt(tie_base_[ent.partner] + ent.cross_rank);
      --subsat_[ent.partner];
    }
  }

  void set_match(int m, int w, int t, int cross_rank) {
    partner_of_m_[m] = w;
    wstate_[w].partner = m;
    wstate_[w].tie = t;
    wstate_[w].rank = cross_rank;
  }

  void emit(TraceEvent e) {
    if (opt_.trace) trace_.push_back(e);
  }

  void propose_from_l(int m) {
    int t = first_tie_[m];
    const int nties = tie_base_[m + 1] - tie_base_[m];
    while (t < nties && tie(m, t).head < 0) ++t;
    first_tie_[m] = t;
    assert(t < nties);

    int p = free_cnt(m, t) > 0 ? first_free_node(m, t) : tie(m, t).head;
    const auto& ent = inst_.adjacency(Side::LeftU, m)[p];
    const int w = ent.partner;
    const bool w_free = wstate_[w].partner < 0;
    const bool special = w_free && free_cnt(m, t) >= 2;
    if (!special) remove_node(m, p);

    ++counters_.l_scans[ent.edge];
    ++counters_.total_proposals;
    const bool target_insecure = insecure(w);
    emit({EventKind::Propose, m, w, -1, -1, special, false, target_insecure});

    if (w_free) {
      set_match(m, w, t, ent.cross_rank);
      on_first_match(w);
      TraceEvent e{EventKind::AcceptUnsaturated, m, w};
      e.special = special;
      e.becomes_insecure = insecure(w);
      emit(e);
      return;
    }
    if (target_insecure) {
      // She accepts regardless of rank; her partner takes a satellite.
      const int m2 = wstate_[w].partner;
      const int t2 = wstate_[w].tie;
      const int p2 = first_free_node(m2, t2);
      const auto& ent2 = inst_.adjacency(Side::LeftU, m2)[p2];
      const int w2 = ent2.partner;
      const bool special2 = free_cnt(m2, t2) >= 2;
      if (!special2) remove_node(m2, p2);
      set_match(m, w, t, ent.cross_rank);
      set_match(m2, w2, t2, ent2.cross_rank);
      assert(!wstate_[w2].matched_ever);
      on_first_match(w2);
      TraceEvent e{EventKind::InsecureSwap, m, w, m2, w2};
      e.special = special2;
      e.becomes_insecure = insecure(w2);
      emit(e);
      return;
    }
    if (ent.cross_rank < wstate_[w].rank) {
      const int old = wstate_[w].partner;
      partner_of_m_[old] = -1;
      sched_.push(old);
      set_match(m, w, t, ent.cross_rank);
      TraceEvent e{EventKind::AcceptStrict, m, w, old};
      e.evicted_subsat = subsatellitic(old);
      emit(e);
      return;
    }
    if (ent.cross_rank == wstate_[w].rank && subsatellitic(wstate_[w].partner)) {
      lprime_[m].push_back(p);
      emit({EventKind::Defer, m, w});
      return;
    }
    emit({EventKind::Reject, m, w});
  }

  void propose_from_lprime(int m) {
    const int p = lprime_[m][lprime_head_[m]++];
    const auto& ent = inst_.adjacency(Side::LeftU, m)[p];
    const int w = ent.partner;

    ++counters_.lprime_scans[ent.edge];
    ++counters_.total_proposals;
    const bool target_insecure = insecure(w);
    {
      TraceEvent e{EventKind::Propose, m, w};
      e.from_lprime = true;
      e.target_insecure = target_insecure;
      emit(e);
    }
    // Her situation may have changed since the deferral; re-check now.
    const int cur = wstate_[w].partner;
    const bool uneasy = cur >= 0 && !target_insecure &&
                        ent.cross_rank == wstate_[w].rank &&
                        subsatellitic(cur);
    if (uneasy) {
      partner_of_m_[cur] = -1;
      sched_.push(cur);
      set_match(m, w, ent.tie, ent.cross_rank);
      TraceEvent e{EventKind::AcceptFromLPrime, m, w, cur};
      e.from_lprime = true;
      e.evicted_subsat = true;
      e.proposer_subsat = subsatellitic(m);
      emit(e);
      return;
    }
    TraceEvent e{EventKind::Reject, m, w};
    e.from_lprime = true;
    emit(e);
  }

  const Instance& inst_;
  const SolveOptions& opt_;
  Scheduler sched_;

  // Per man: tie-local linked lists over adjacency positions, flattened
  // behind prefix-sum bases (positions at pos_base_[m] + p, ties at
  // tie_base_[m] + t). Grouping the fields per entity keeps each random
  // touch within one cache line.
  std::vector<int> pos_base_, tie_base_;
  std::vector<Node> nodes_;
  std::vector<Tie> ties_;
  std::vector<std::uint8_t> free_cnt_;  // free women per tie, hot path separate from Tie
  std::unordered_map<int, int> big_free_;  // exact counts for ties of 255+ women
  std::vector<int> first_tie_;
  std::vector<int> l_remaining_;
  std::vector<std::vector<int>> lprime_;  // deferred positions, FIFO by head index
  std::vector<int> lprime_head_;
  std::vector<int> subsat_;  // free women anywhere on L_m

  std::vector<int> partner_of_m_;
  std::vector<WState> wstate_;

  Counters counters_;
  std::vector<TraceEvent> trace_;
};

}  // namespace detail

// Algorithm GS Modified. Requires unit capacities; the result is a stable
// matching admitting no masculine or feminine dangerous path, hence a
// 3/2-approximation of the largest stable matching. Deterministic given
// (policy, seed, script).
inline SolveResult solve(const Instance& inst, const SolveOptions& opt = {}) {
  if (!inst.unit_capacities())
    throw CapacityError("solve() requires b(v) = 1 for every agent; use solve_b()");
  detail::GsModifiedSolver s(inst, opt);
  return s.run();
}

// Classic Gale-Shapley on the tie-broken instance (informational baseline;
// stable for the original instance but only a 2-approximation in general).
inline Matching gale_shapley_baseline(const Instance& inst,
                                      std::uint64_t tiebreak_seed = 0) {
  if (!inst.unit_capacities())
    throw CapacityError("gale_shapley_baseline() requires b(v) = 1");
  SplitMix64 rng(tiebreak_seed);
  const int nl = inst.n_left(), nr = inst.n_right();

  // Strict proposal order per man and strict rank per woman, obtained by
  // shuffling inside each tie (seed 0 keeps the input order).
  std::vector<std::vector<int>> order(nl);  // adjacency positions
  for (int m = 0; m < nl; ++m) {
    const auto& prefs = inst.prefs(Side::LeftU, m);
    int begin = 0;
    for (const auto& tie : prefs) {
      int len = static_cast<int>(tie.size());
      std::vector<int> idx(len);
      for (int i = 0; i < len; ++i) idx[i] = begin + i;
      if (tiebreak_seed != 0 && len > 1) rng.shuffle(idx);
      order[m].insert(order[m].end(), idx.begin(), idx.end());
      begin += len;
    }
  }
  std::vector<int> strict_rank(inst.num_edges(), 0);
  for (int w = 0; w < nr; ++w) {
    const auto& adj = inst.adjacency(Side::RightW, w);
    const auto& prefs = inst.prefs(Side::RightW, w);
    int begin = 0, r = 0;
    for (const auto& tie : prefs) {
      int len = static_cast<int>(tie.size());
      std::vector<int> idx(len);
      for (int i = 0; i < len; ++i) idx[i] = begin + i;
      if (tiebreak_seed != 0 && len > 1) rng.shuffle(idx);
      for (int p : idx) strict_rank[adj[p].edge] = r++;
      begin += len;
    }
  }

  std::vector<int> cursor(nl, 0), partner_m(nl, -1), partner_w(nr, -1);
  std::vector<int> partner_edge_rank(nr, -1);
  std::vector<int> stack;
  for (int m = nl - 1; m >= 0; --m) stack.push_back(m);
  while (!stack.empty()) {
    int m = stack.back();
    stack.pop_back();
    if (partner_m[m] >= 0) continue;
    while (cursor[m] < static_cast<int>(order[m].size())) {
      const auto& ent = inst.adjacency(Side::LeftU, m)[order[m][cursor[m]++]];
      int w = ent.partner, r = strict_rank[ent.edge];
      if (partner_w[w] < 0) {
        partner_w[w] = m;
        partner_m[m] = w;
        partner_edge_rank[w] = r;
        break;
      }
      if (r < partner_edge_rank[w]) {
        int old = partner_w[w];
        partner_m[old] = -1;
        stack.push_back(old);
        partner_w[w] = m;
        partner_m[m] = w;
        partner_edge_rank[w] = r;
        break;
      }
    }
  }
  std::vector<std::pair<int, int>> edges;
  for (int m = 0; m < nl; ++m)
    if (partner_m[m] >= 0) edges.emplace_back(m, partner_m[m]);
  return Matching(std::move(edges));
}

}  // namespace smti
