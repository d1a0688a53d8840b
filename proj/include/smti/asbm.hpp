#pragma once

#include <cassert>
#include <cmath>
#include <deque>
#include <list>
#include <map>
#include <optional>
#include <vector>

#include "smti/core.hpp"
#include "smti/rng.hpp"
#include "smti/solver_types.hpp"

// Many-to-many engine: 3/2-approximation for maximum-cardinality stable
// b-matchings. Structure mirrors the one-to-one engine with "unsaturated"
// substituted for "free" throughout, plus per-responder books: a rank-keyed
// priority queue of indifference groups over the current partners
// (subsatellitic members first within each group), a lazily pruned satellite
// list S_w, and a per-proposer counter of unsaturated responders, so
// subsatellitic checks are O(1) and worst-partner queries are O(log b(w)).
//
// Conventions that the underlying definitions leave open (each one recorded
// alongside its reason):
//   - A satellite of u wrt w must not already be a partner of u; otherwise
//     the swap would shrink deg(u). Special edges count candidate mates the
//     same way. Availability per (proposer, tie) therefore counts unsaturated
//     non-partner members.
//   - Proposal scans skip entries that are current partners without consuming
//     them; a retained special entry belongs to a partner until she rejects.
//   - The "is w (still) uneasy wrt u'" re-deferral guards in the eviction and
//     L' branches are evaluated on the post-swap matching.
//   - By default a responder relocates to tie tails on her first saturation,
//     keeping the unsaturated-first list invariant; literal_relocation moves
//     her on her first match instead (identical at unit capacities).
//   - An agent with capacity 0 counts as saturated from the start.

namespace smti {

// Per-responder view of her current partners (bookkeeping only; the solver
// below maintains the invariants, worst_matched only reads them).
struct WAgentBook {
  struct Group {
    std::list<int> subsat;  // subsatellitic members, insertion order
    std::list<int> rest;    // the others, insertion order
    bool empty() const { return subsat.empty() && rest.empty(); }
    int front() const { return subsat.empty() ? rest.front() : subsat.front(); }
  };
  std::map<int, Group> groups;  // rank on L_w -> partners at that rank
  std::vector<int> satellites;  // S_w as edge ids, pruned lazily
  bool saturated = false;
};

// Worst current partner of the book's owner: a member of the maximum-rank
// group, a subsatellitic one whenever the group has any. O(log b(w)).
inline std::optional<int> worst_matched(const WAgentBook& book) {
  if (book.groups.empty()) return std::nullopt;
  return book.groups.rbegin()->second.front();
}

namespace detail {

class AsbmSolver {
 public:
  AsbmSolver(const Instance& inst, const SolveOptions& opt)
      : inst_(inst), opt_(opt), sched_(opt.policy, opt.seed, opt.script) {
    const int nl = inst.n_left(), nr = inst.n_right();
    next_.resize(nl);
    prev_.resize(nl);
    present_.resize(nl);
    tie_head_.resize(nl);
    tie_tail_.resize(nl);
    tie_nodes_.resize(nl);
    tie_partners_.resize(nl);
    avail_.resize(nl);
    first_tie_.resize(nl, 0);
    l_remaining_.resize(nl, 0);
    pm_count_.resize(nl, 0);
    lprime_.resize(nl);
    subsat_.resize(nl, 0);
    deg_u_.assign(nl, 0);
    cap_u_.resize(nl);
    deg_w_.assign(nr, 0);
    cap_w_.resize(nr);
    books_.resize(nr);
    qlog_.resize(nr);
    w_matched_ever_.assign(nr, 0);
    in_m_.assign(inst.num_edges(), 0);
    in_sw_.assign(inst.num_edges(), 0);
    in_subsat_list_.assign(inst.num_edges(), 0);
    group_it_.resize(inst.num_edges());
    counters_.l_scans.assign(inst.num_edges(), 0);
    counters_.lprime_scans.assign(inst.num_edges(), 0);

    for (int w = 0; w < nr; ++w) {
      cap_w_[w] = inst.capacity(Side::RightW, w);
      books_[w].saturated = cap_w_[w] == 0;
      qlog_[w] = std::log2(std::max(2, cap_w_[w]));
    }
    SplitMix64 rng(opt.seed);
    for (int u = 0; u < nl; ++u) {
      cap_u_[u] = inst.capacity(Side::LeftU, u);
      const auto& adj = inst.adjacency(Side::LeftU, u);
      const int deg = static_cast<int>(adj.size());
      const int nties = static_cast<int>(inst.prefs(Side::LeftU, u).size());
      next_[u].assign(deg, -1);
      prev_[u].assign(deg, -1);
      present_[u].assign(deg, 1);
      tie_head_[u].assign(nties, -1);
      tie_tail_[u].assign(nties, -1);
      tie_nodes_[u].assign(nties, 0);
      tie_partners_[u].assign(nties, 0);
      avail_[u].assign(nties, 0);
      l_remaining_[u] = deg;
      int begin = 0;
      for (int t = 0; t < nties; ++t) {
        int len = static_cast<int>(inst.prefs(Side::LeftU, u)[t].size());
        std::vector<int> order(len);
        for (int i = 0; i < len; ++i) order[i] = begin + i;
        if (opt.seed != 0 && len > 1) rng.shuffle(order);
        for (int p : order) {
          link_back(u, t, p);
          if (!saturated(adj[p].partner)) {
            ++avail_[u][t];
            ++subsat_[u];
          }
        }
        begin += len;
      }
    }
    for (int u = nl - 1; u >= 0; --u)
      if (cap_u_[u] > 0) sched_.push(u);
  }

  SolveResult run() {
    auto runnable = [this](int u) {
      return deg_u_[u] < cap_u_[u] &&
             (l_remaining_[u] - pm_count_[u] > 0 || !lprime_[u].empty());
    };
    int u;
    while ((u = sched_.next(runnable)) >= 0) {
      if (l_remaining_[u] - pm_count_[u] > 0)
        propose_from_l(u);
      else
        propose_from_lprime(u);
      if (runnable(u)) sched_.push(u);
    }
    SolveResult res;
    std::vector<std::pair<int, int>> edges;
    for (std::size_t e = 0; e < in_m_.size(); ++e)
      if (in_m_[e]) edges.emplace_back(inst_.edges()[e].left, inst_.edges()[e].right);
    res.matching = Matching(std::move(edges));
    res.counters = std::move(counters_);
    res.trace = std::move(trace_);
    return res;
  }

  const WAgentBook& book(int w) const { return books_[w]; }

 private:
  bool saturated(int w) const { return books_[w].saturated; }
  bool subsatellitic(int u) const { return subsat_[u] > 0; }

  void link_back(int u, int t, int p) {
    prev_[u][p] = tie_tail_[u][t];
    next_[u][p] = -1;
    if (tie_tail_[u][t] >= 0)
      next_[u][tie_tail_[u][t]] = p;
    else
      tie_head_[u][t] = p;
    tie_tail_[u][t] = p;
    ++tie_nodes_[u][t];
  }

  void unlink(int u, int p) {
    int t = inst_.adjacency(Side::LeftU, u)[p].tie;
    int pr = prev_[u][p], nx = next_[u][p];
    (pr >= 0 ? next_[u][pr] : tie_head_[u][t]) = nx;
    (nx >= 0 ? prev_[u][nx] : tie_tail_[u][t]) = pr;
    --tie_nodes_[u][t];
  }

  void remove_node(int u, int p) {
    assert(!in_m_[inst_.adjacency(Side::LeftU, u)[p].edge]);
    unlink(u, p);
    present_[u][p] = 0;
    --l_remaining_[u];
  }

  void move_to_tie_end(int u, int p) {
    int t = inst_.adjacency(Side::LeftU, u)[p].tie;
    if (tie_tail_[u][t] == p) return;
    unlink(u, p);
    link_back(u, t, p);
  }

  // First unsaturated non-partner in tie t of L_u; partners and saturated
  // stragglers in front of her drift to the tie tail. Needs avail > 0.
  int first_avail_node(int u, int t) {
    int p = tie_head_[u][t];
    while (p >= 0) {
      const auto& ent = inst_.adjacency(Side::LeftU, u)[p];
      if (!saturated(ent.partner) && !in_m_[ent.edge]) return p;
      int q = next_[u][p];
      move_to_tie_end(u, p);
      p = q;
    }
    assert(false && "avail says an unsaturated non-partner exists in this tie");
    return -1;
  }

  // First non-partner in tie t (saturated allowed); partners drift to the
  // tail. Needs tie_nodes - tie_partners > 0.
  int first_nonpartner_node(int u, int t) {
    int p = tie_head_[u][t];
    while (p >= 0) {
      const auto& ent = inst_.adjacency(Side::LeftU, u)[p];
      if (!in_m_[ent.edge]) return p;
      int q = next_[u][p];
      move_to_tie_end(u, p);
      p = q;
    }
    assert(false && "tie counters say a non-partner node exists in this tie");
    return -1;
  }

  // Still-satellitic S_w entry (edge id) if any, or -1; dead entries are
  // dropped for good on the way.
  int insecure_edge(int w) {
    auto& s = books_[w].satellites;
    std::size_t i = 0;
    int found = -1;
    while (i < s.size()) {
      int e = s[i];
      const auto& ed = inst_.edges()[e];
      if (in_m_[e] && avail_[ed.left][ed.rank_left] >= 1) {
        found = e;
        break;
      }
      in_sw_[e] = 0;
      ++i;
    }
    s.erase(s.begin(), s.begin() + i);
    return found;
  }

  bool insecure(int w) { return insecure_edge(w) >= 0; }

  // Saturated, not insecure, and holding a subsatellitic partner at rank r.
  bool uneasy_at_rank(int w, int r) {
    if (!saturated(w) || insecure(w)) return false;
    counters_.queue_ops_logweighted += qlog_[w];
    auto it = books_[w].groups.find(r);
    return it != books_[w].groups.end() && !it->second.subsat.empty();
  }

  // u stops being subsatellitic exactly once: he moves behind the
  // subsatellitic members of every group he sits in.
  void ceases_subsat(int u) {
    for (const auto& ent : inst_.adjacency(Side::LeftU, u)) {
      if (!in_m_[ent.edge] || !in_subsat_list_[ent.edge]) continue;
      auto& g = books_[ent.partner].groups.at(ent.cross_rank);
      g.rest.splice(g.rest.end(), g.subsat, group_it_[ent.edge]);
      in_subsat_list_[ent.edge] = 0;
      counters_.queue_ops_logweighted += qlog_[ent.partner];
    }
  }

  // First saturation of w: every incident proposer loses an unsaturated
  // neighbor, and (in the default mode) her entries drift to tie tails except
  // the one she saturated through.
  void on_first_saturation(int w, int exc_u, int exc_t) {
    books_[w].saturated = true;
    for (const auto& ent : inst_.adjacency(Side::RightW, w)) {
      int u2 = ent.partner, t2 = ent.cross_rank, p2 = ent.cross_pos;
      if (!in_m_[ent.edge]) {  // partners already dropped her on add_edge
        if (--subsat_[u2] == 0) ceases_subsat(u2);
        --avail_[u2][t2];
      }
      if (!opt_.literal_relocation && !(u2 == exc_u && t2 == exc_t) &&
          present_[u2][p2])
        move_to_tie_end(u2, p2);
    }
  }

  void relocate_literal(int w, int exc_u, int exc_t) {
    for (const auto& ent : inst_.adjacency(Side::RightW, w)) {
      int u2 = ent.partner, t2 = ent.cross_rank, p2 = ent.cross_pos;
      if (!(u2 == exc_u && t2 == exc_t) && present_[u2][p2])
        move_to_tie_end(u2, p2);
    }
  }

  // Adds (u, w). `tie` is w's tie on L_u, `rank` is u's rank on L_w.
  void add_edge(int e, int u, int w, int tie, int rank) {
    const bool w_was_unsat = !saturated(w);
    in_m_[e] = 1;
    ++deg_u_[u];
    ++deg_w_[w];
    if (present_[u][inst_.edges()[e].pos_left]) {
      ++pm_count_[u];
      ++tie_partners_[u][tie];
    }
    if (w_was_unsat) {
      // She is a partner now, so she stops counting toward u's unsaturated
      // options; a displaced u must have somewhere new to go.
      --avail_[u][tie];
      if (--subsat_[u] == 0) ceases_subsat(u);
    }

    auto& g = books_[w].groups[rank];
    if (subsatellitic(u)) {
      g.subsat.push_back(u);
      group_it_[e] = std::prev(g.subsat.end());
      in_subsat_list_[e] = 1;
    } else {
      g.rest.push_back(u);
      group_it_[e] = std::prev(g.rest.end());
      in_subsat_list_[e] = 0;
    }
    counters_.queue_ops_logweighted += qlog_[w];

    if (avail_[u][tie] >= 1 && !in_sw_[e]) {  // u satellitic wrt w
      books_[w].satellites.push_back(e);
      in_sw_[e] = 1;
    }
    if (opt_.literal_relocation && !w_matched_ever_[w])
      relocate_literal(w, u, tie);
    w_matched_ever_[w] = 1;
    if (w_was_unsat && deg_w_[w] == cap_w_[w]) on_first_saturation(w, u, tie);
  }

  // Removes (u, w); only ever called while w stays saturated across the
  // enclosing proposal, so availability counts are untouched.
  void remove_edge(int e, int u, int w, int tie, int rank) {
    in_m_[e] = 0;
    --deg_u_[u];
    --deg_w_[w];
    if (present_[u][inst_.edges()[e].pos_left]) {
      --pm_count_[u];
      --tie_partners_[u][tie];
    }
    auto it = books_[w].groups.find(rank);
    auto& g = it->second;
    (in_subsat_list_[e] ? g.subsat : g.rest).erase(group_it_[e]);
    if (g.empty()) books_[w].groups.erase(it);
    counters_.queue_ops_logweighted += qlog_[w];
    sched_.push(u);
  }

  void remove_edge(int e) {
    const auto& ed = inst_.edges()[e];
    remove_edge(e, ed.left, ed.right, ed.rank_left, ed.rank_right);
  }

  void defer_to(int owner, int w) {
    int e = inst_.edge_id(owner, w);
    lprime_[owner].push_back(inst_.edges()[e].pos_left);
  }

  void emit(TraceEvent e) {
    if (opt_.trace) trace_.push_back(e);
  }

  void propose_from_l(int u) {
    int t = first_tie_[u];
    const int nties = static_cast<int>(tie_head_[u].size());
    while (t < nties && tie_nodes_[u][t] == 0) ++t;
    first_tie_[u] = t;
    // Ties holding only current partners are passed over without moving the
    // cursor; a rejection can make them proposable again.
    while (t < nties && tie_nodes_[u][t] - tie_partners_[u][t] == 0) ++t;
    assert(t < nties);

    int p = avail_[u][t] > 0 ? first_avail_node(u, t) : first_nonpartner_node(u, t);
    const auto& ent = inst_.adjacency(Side::LeftU, u)[p];
    const int w = ent.partner, e = ent.edge;
    const bool w_unsat = !saturated(w);
    const bool special = w_unsat && avail_[u][t] >= 2;
    if (!special) remove_node(u, p);

    ++counters_.l_scans[e];
    ++counters_.total_proposals;
    const int sat_edge = saturated(w) ? insecure_edge(w) : -1;
    emit({EventKind::Propose, u, w, -1, -1, special, false, sat_edge >= 0});

    if (w_unsat) {
      add_edge(e, u, w, t, ent.cross_rank);
      TraceEvent ev{EventKind::AcceptUnsaturated, u, w};
      ev.special = special;
      ev.becomes_insecure = saturated(w) && insecure(w);
      emit(ev);
      return;
    }
    if (sat_edge >= 0) {
      // w is insecure: she takes u, the satellitic partner takes a satellite.
      const auto& ed2 = inst_.edges()[sat_edge];
      const int u2 = ed2.left, t2 = ed2.rank_left;
      const int p2 = first_avail_node(u2, t2);
      const auto& ent2 = inst_.adjacency(Side::LeftU, u2)[p2];
      const int w2 = ent2.partner;
      const bool special2 = avail_[u2][t2] >= 2;
      if (!special2) remove_node(u2, p2);
      remove_edge(sat_edge);
      add_edge(e, u, w, t, ent.cross_rank);
      add_edge(ent2.edge, u2, w2, t2, ent2.cross_rank);
      TraceEvent ev{EventKind::InsecureSwap, u, w, u2, w2};
      ev.special = special2;
      ev.becomes_insecure = saturated(w2) && insecure(w2);
      emit(ev);
      return;
    }
    if (books_[w].groups.empty()) {  // capacity 0: nobody to displace
      emit({EventKind::Reject, u, w});
      return;
    }
    counters_.queue_ops_logweighted += qlog_[w];
    const int worst_rank = books_[w].groups.rbegin()->first;
    if (ent.cross_rank < worst_rank) {
      const int u2 = books_[w].groups.rbegin()->second.front();
      TraceEvent ev{EventKind::AcceptStrict, u, w, u2};
      ev.evicted_subsat = subsatellitic(u2);
      remove_edge(inst_.edge_id(u2, w));
      add_edge(e, u, w, t, ent.cross_rank);
      emit(ev);
      if (uneasy_at_rank(w, worst_rank)) {
        defer_to(u2, w);
        emit({EventKind::EvictDefer, u2, w});
      }
      return;
    }
    if (ent.cross_rank == worst_rank && uneasy_at_rank(w, worst_rank)) {
      lprime_[u].push_back(p);
      emit({EventKind::Defer, u, w});
      return;
    }
    emit({EventKind::Reject, u, w});
  }

  void propose_from_lprime(int u) {
    const int p = lprime_[u].front();
    lprime_[u].pop_front();
    const auto& ent = inst_.adjacency(Side::LeftU, u)[p];
    const int w = ent.partner, e = ent.edge;

    ++counters_.lprime_scans[e];
    ++counters_.total_proposals;
    {
      TraceEvent ev{EventKind::Propose, u, w};
      ev.from_lprime = true;
      ev.target_insecure = saturated(w) && insecure(w);
      emit(ev);
    }
    // Her situation may have changed since the deferral; re-check now. A
    // deferral can also go stale by u matching her through his second scan.
    if (!in_m_[e] && uneasy_at_rank(w, ent.cross_rank)) {
      const int u2 = books_[w].groups.at(ent.cross_rank).subsat.front();
      remove_edge(inst_.edge_id(u2, w));
      add_edge(e, u, w, ent.tie, ent.cross_rank);
      TraceEvent ev{EventKind::AcceptFromLPrime, u, w, u2};
      ev.from_lprime = true;
      ev.evicted_subsat = true;
      ev.proposer_subsat = subsatellitic(u);
      emit(ev);
      if (uneasy_at_rank(w, ent.cross_rank)) {
        defer_to(u2, w);
        emit({EventKind::EvictDefer, u2, w});
      }
      return;
    }
    TraceEvent ev{EventKind::Reject, u, w};
    ev.from_lprime = true;
    emit(ev);
  }

  const Instance& inst_;
  const SolveOptions& opt_;
  Scheduler sched_;

  // Per proposer: tie-local linked lists over adjacency positions.
  std::vector<std::vector<int>> next_, prev_;
  std::vector<std::vector<std::uint8_t>> present_;
  std::vector<std::vector<int>> tie_head_, tie_tail_, tie_nodes_;
  std::vector<std::vector<int>> tie_partners_;  // present nodes already in M
  std::vector<std::vector<int>> avail_;  // unsaturated non-partners per tie
  std::vector<int> first_tie_;
  std::vector<int> l_remaining_;
  std::vector<int> pm_count_;  // present nodes of current partners on L_u
  std::vector<std::deque<int>> lprime_;
  std::vector<int> subsat_;  // unsaturated non-partner responders anywhere on L_u

  std::vector<int> deg_u_, cap_u_, deg_w_, cap_w_;
  std::vector<WAgentBook> books_;
  std::vector<double> qlog_;  // log2(max(2, b(w)))
  std::vector<std::uint8_t> w_matched_ever_;
  std::vector<std::uint8_t> in_m_, in_sw_, in_subsat_list_;
  std::vector<std::list<int>::iterator> group_it_;

  Counters counters_;
  std::vector<TraceEvent> trace_;
};

}  // namespace detail

// Algorithm for stable b-matchings: a valid b-matching with no blocking pair
// and no dangerous path, hence a 3/2-approximation of the largest stable
// b-matching. If the proposer side has the larger maximum capacity the sides
// are swapped internally (result.proposer_side reports which side proposed;
// the matching always comes back in the input orientation).
inline SolveResult solve_b(const Instance& inst, const SolveOptions& opt = {}) {
  if (inst.max_capacity(Side::LeftU) > inst.max_capacity(Side::RightW)) {
    Instance flipped = inst.transposed();
    detail::AsbmSolver s(flipped, opt);
    SolveResult res = s.run();
    res.proposer_side = Side::RightW;
    res.matching = res.matching.transposed();
    Counters remapped;
    remapped.total_proposals = res.counters.total_proposals;
    remapped.queue_ops_logweighted = res.counters.queue_ops_logweighted;
    remapped.l_scans.assign(inst.num_edges(), 0);
    remapped.lprime_scans.assign(inst.num_edges(), 0);
    for (std::size_t e = 0; e < flipped.num_edges(); ++e) {
      const auto& ed = flipped.edges()[e];
      int orig = inst.edge_id(ed.right, ed.left);
      remapped.l_scans[orig] = res.counters.l_scans[e];
      remapped.lprime_scans[orig] = res.counters.lprime_scans[e];
    }
    res.counters = std::move(remapped);
    return res;
  }
  detail::AsbmSolver s(inst, opt);
  return s.run();
}

}  // namespace smti
