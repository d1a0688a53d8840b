#pragma once

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "smti/core.hpp"
#include "smti/solver_types.hpp"

// Independent replay of solver traces. The checkers rebuild the matching
// event by event straight from the instance and verify the run-invariants
// the engines promise:
//
// one-to-one:
//   1. a matched woman stays matched;
//   2. a woman becomes insecure only at her first proposal and only through a
//      special edge; an insecure woman accepts every proposal and is not
//      insecure afterwards;
//   3. outside insecure swaps a woman's partner never gets worse, and an
//      equally-good replacement happens only through a proposal from L';
//   4. in an equal-rank displacement the displaced man is subsatellitic and
//      the replacement is not;
//
// b-matching:
//   1. a saturated responder stays saturated;
//   2. an insecure responder accepts every proposal; once saturated and not
//      insecure, never insecure again;
//   3. a matched proposer is rejected only via a satellite swap, a strictly
//      better proposal displacing a worst partner, or an equal-rank L'
//      displacement of a subsatellitic worst partner.
//
// Insecure/subsatellitic statuses are recomputed from the replayed matching,
// not taken from the events, so the trace fields are cross-checked too.

namespace trace_check {

using smti::EventKind;
using smti::Instance;
using smti::Side;
using smti::SolveResult;
using smti::TraceEvent;

namespace impl {

inline std::string describe(const TraceEvent& e, std::size_t i) {
  std::ostringstream out;
  out << "event " << i << " (kind " << static_cast<int>(e.kind) << ", m"
      << e.u + 1 << ", w" << e.w + 1 << ")";
  return out.str();
}

struct Replay {
  const Instance& inst;
  std::vector<std::vector<int>> m_of_u, m_of_w;  // partner lists
  std::vector<int> cap_u, cap_w;
  std::vector<char> w_saturated_ever, w_not_insecure_point;
  std::vector<std::string> errors;

  explicit Replay(const Instance& in) : inst(in) {
    m_of_u.resize(in.n_left());
    m_of_w.resize(in.n_right());
    cap_u.resize(in.n_left());
    cap_w.resize(in.n_right());
    for (int u = 0; u < in.n_left(); ++u) cap_u[u] = in.capacity(Side::LeftU, u);
    for (int w = 0; w < in.n_right(); ++w) cap_w[w] = in.capacity(Side::RightW, w);
    w_saturated_ever.assign(in.n_right(), 0);
    for (int w = 0; w < in.n_right(); ++w) w_saturated_ever[w] = cap_w[w] == 0;
    w_not_insecure_point.assign(in.n_right(), 0);
  }

  void fail(const TraceEvent& e, std::size_t i, const std::string& what) {
    errors.push_back(describe(e, i) + ": " + what);
  }

  bool unsat_w(int w) const { return (int)m_of_w[w].size() < cap_w[w]; }
  bool unsat_u(int u) const { return (int)m_of_u[u].size() < cap_u[u]; }
  bool in_m(int u, int w) const {
    return std::find(m_of_u[u].begin(), m_of_u[u].end(), w) != m_of_u[u].end();
  }
  int rank_w(int w, int u) const { return *inst.rank_of({Side::RightW, w}, u); }

  void add(int u, int w) {
    m_of_u[u].push_back(w);
    m_of_w[w].push_back(u);
    if (!unsat_w(w)) w_saturated_ever[w] = 1;
  }
  void remove(int u, int w) {
    auto& a = m_of_u[u];
    a.erase(std::find(a.begin(), a.end(), w));
    auto& b = m_of_w[w];
    b.erase(std::find(b.begin(), b.end(), u));
  }

  // Unsaturated non-partner responder anywhere on L_u: a displaced
  // subsatellitic proposer always has somewhere new to go.
  bool subsat(int u) const {
    for (const auto& ent : inst.adjacency(Side::LeftU, u))
      if (unsat_w(ent.partner) && !in_m(u, ent.partner)) return true;
    return false;
  }
  // u has an unsaturated non-partner tied with w on L_u.
  bool satellitic_wrt(int u, int w) const {
    int t = *inst.rank_of({Side::LeftU, u}, w);
    for (int w1 : inst.prefs(Side::LeftU, u)[t])
      if (w1 != w && unsat_w(w1) && !in_m(u, w1)) return true;
    return false;
  }
  bool insecure(int w) const {
    for (int u : m_of_w[w])
      if (satellitic_wrt(u, w)) return true;
    return false;
  }
  int worst_rank(int w) const {
    int r = -1;
    for (int u : m_of_w[w]) r = std::max(r, rank_w(w, u));
    return r;
  }
  bool worst_has_subsat(int w) const {
    int r = worst_rank(w);
    for (int u : m_of_w[w])
      if (rank_w(w, u) == r && subsat(u)) return true;
    return false;
  }
  bool uneasy_wrt_rank(int w, int r) const {
    if (unsat_w(w) || insecure(w)) return false;
    for (int u : m_of_w[w])
      if (rank_w(w, u) == r && subsat(u)) return true;
    return false;
  }
};

}  // namespace impl

// Shared replay. `one_to_one` turns on the extra one-to-one lemma checks.
inline std::vector<std::string> check_trace(const Instance& inst,
                                            const std::vector<TraceEvent>& trace,
                                            bool one_to_one) {
  impl::Replay rp(inst);
  std::size_t i = 0;
  while (i < trace.size()) {
    const TraceEvent& pr = trace[i];
    if (pr.kind != EventKind::Propose) {
      rp.fail(pr, i, "expected a Propose event here");
      break;
    }
    const int u = pr.u, w = pr.w;
    if (!rp.unsat_u(u)) rp.fail(pr, i, "proposer is already saturated");
    if (rp.in_m(u, w)) rp.fail(pr, i, "proposal to a current partner");
    const bool sat_pre = !rp.unsat_w(w);
    const bool insecure_pre = rp.insecure(w);
    if (sat_pre && pr.target_insecure != insecure_pre)
      rp.fail(pr, i, "target_insecure disagrees with the replayed state");
    if (one_to_one && pr.from_lprime && insecure_pre)
      rp.fail(pr, i, "an L' proposal found an insecure woman");
    if (sat_pre && !insecure_pre) rp.w_not_insecure_point[w] = 1;
    if (sat_pre && insecure_pre && rp.w_not_insecure_point[w])
      rp.fail(pr, i, "saturated responder became insecure again");

    if (i + 1 >= trace.size()) {
      rp.fail(pr, i, "proposal without an outcome event");
      break;
    }
    const TraceEvent& ev = trace[++i];
    if (ev.u != u || ev.w != w)
      rp.fail(ev, i, "outcome does not match the proposal");

    // An insecure responder accepts every proposal.
    if (sat_pre && insecure_pre && ev.kind != EventKind::InsecureSwap)
      rp.fail(ev, i, "insecure responder did not accept");

    switch (ev.kind) {
      case EventKind::AcceptUnsaturated: {
        if (sat_pre) rp.fail(ev, i, "unsaturated-accept at a saturated responder");
        const bool first = rp.m_of_w[w].empty() && !rp.w_saturated_ever[w];
        rp.add(u, w);
        const bool insecure_now = !rp.unsat_w(w) && rp.insecure(w);
        if (ev.becomes_insecure != insecure_now)
          rp.fail(ev, i, "becomes_insecure disagrees with the replayed state");
        if (one_to_one && insecure_now && !(first && ev.special))
          rp.fail(ev, i, "woman became insecure outside a first special proposal");
        break;
      }
      case EventKind::InsecureSwap: {
        if (!sat_pre || !insecure_pre)
          rp.fail(ev, i, "satellite swap at a responder who is not insecure");
        const int u2 = ev.u2, w2 = ev.w2;
        if (!rp.in_m(u2, w))
          rp.fail(ev, i, "displaced agent is not a partner of the responder");
        else if (!rp.satellitic_wrt(u2, w))
          rp.fail(ev, i, "displaced partner is not satellitic wrt the responder");
        if (!rp.unsat_w(w2) || rp.in_m(u2, w2) ||
            *inst.rank_of({Side::LeftU, u2}, w2) !=
                *inst.rank_of({Side::LeftU, u2}, w))
          rp.fail(ev, i, "satellite is not an unsaturated equally-good non-partner");
        rp.remove(u2, w);
        rp.add(u, w);
        rp.add(u2, w2);
        // One-to-one: she is no longer insecure at all. Many-to-many: another
        // satellitic partner may keep her insecure, but not after she was
        // observed saturated and not insecure.
        if (rp.insecure(w) && (one_to_one || rp.w_not_insecure_point[w]))
          rp.fail(ev, i, "responder is insecure again after the swap");
        const bool insecure_now2 = !rp.unsat_w(w2) && rp.insecure(w2);
        if (ev.becomes_insecure != insecure_now2)
          rp.fail(ev, i, "becomes_insecure disagrees with the replayed state");
        break;
      }
      case EventKind::AcceptStrict: {
        if (!sat_pre || insecure_pre)
          rp.fail(ev, i, "strict accept outside the saturated, not-insecure case");
        const int u2 = ev.u2;
        const int worst = rp.worst_rank(w);
        if (!rp.in_m(u2, w) || rp.rank_w(w, u2) != worst)
          rp.fail(ev, i, "evicted agent is not a worst partner");
        if (rp.rank_w(w, u) >= worst)
          rp.fail(ev, i, "strict accept without strict preference");
        if (ev.evicted_subsat != rp.subsat(u2))
          rp.fail(ev, i, "evicted_subsat disagrees with the replayed state");
        if (rp.worst_has_subsat(w) && !ev.evicted_subsat)
          rp.fail(ev, i, "a subsatellitic worst partner was passed over");
        rp.remove(u2, w);
        rp.add(u, w);
        break;
      }
      case EventKind::Defer: {
        if (!sat_pre || insecure_pre ||
            !rp.uneasy_wrt_rank(w, rp.rank_w(w, u)))
          rp.fail(ev, i, "deferral at a responder who is not uneasy wrt the proposer");
        break;
      }
      case EventKind::AcceptFromLPrime: {
        if (!ev.from_lprime) rp.fail(ev, i, "L' accept not flagged from_lprime");
        if (!sat_pre || insecure_pre ||
            !rp.uneasy_wrt_rank(w, rp.rank_w(w, u)))
          rp.fail(ev, i, "L' accept at a responder who is not uneasy wrt the proposer");
        const int u2 = ev.u2;
        if (!rp.in_m(u2, w) || rp.rank_w(w, u2) != rp.rank_w(w, u))
          rp.fail(ev, i, "displaced agent is not an equally-good partner");
        if (!rp.subsat(u2))
          rp.fail(ev, i, "equal-rank displacement of a non-subsatellitic partner");
        if (!ev.evicted_subsat)
          rp.fail(ev, i, "evicted_subsat not set on an L' displacement");
        if (rp.rank_w(w, u2) != rp.worst_rank(w))
          rp.fail(ev, i, "L' displacement outside the worst group");
        if (ev.proposer_subsat != rp.subsat(u))
          rp.fail(ev, i, "proposer_subsat disagrees with the replayed state");
        if (one_to_one && ev.proposer_subsat)
          rp.fail(ev, i, "equal-rank replacement is subsatellitic");
        rp.remove(u2, w);
        rp.add(u, w);
        break;
      }
      case EventKind::Reject:
        break;
      default:
        rp.fail(ev, i, "unexpected outcome kind");
    }

    // Post-swap re-deferral, b-matching only.
    if (i + 1 < trace.size() && trace[i + 1].kind == EventKind::EvictDefer) {
      const TraceEvent& ed = trace[++i];
      if (ev.kind != EventKind::AcceptStrict && ev.kind != EventKind::AcceptFromLPrime)
        rp.fail(ed, i, "re-deferral outside an eviction");
      else if (ed.u != ev.u2 || ed.w != w)
        rp.fail(ed, i, "re-deferral names the wrong agents");
      else if (!rp.uneasy_wrt_rank(w, rp.rank_w(w, ed.u)))
        rp.fail(ed, i, "re-deferral while not uneasy wrt the evicted agent");
    }

    // Saturation is monotone (the replay only ever grows responder degrees,
    // so it suffices that no degree ever drops below a reached capacity).
    for (int ww : {w, ev.w2}) {
      if (ww < 0) continue;
      if (rp.w_saturated_ever[ww] && rp.unsat_w(ww))
        rp.fail(ev, i, "a saturated responder became unsaturated");
    }
    ++i;
  }
  return rp.errors;
}

inline std::vector<std::string> check_one_to_one(const Instance& inst,
                                                 const std::vector<TraceEvent>& trace) {
  return check_trace(inst, trace, true);
}

// `inst` must be in the trace's proposer orientation (transpose the input
// when result.proposer_side is the right side).
inline std::vector<std::string> check_b(const Instance& inst,
                                        const std::vector<TraceEvent>& trace) {
  return check_trace(inst, trace, false);
}

// Exact counter bounds: per-edge L-scans <= 2 with the second scan only after
// a special first scan, per-edge L'-scans <= 1, total <= 3|E|. The
// special-first condition is rechecked from the trace when one is present.
inline std::vector<std::string> check_counters(const Instance& inst,
                                               const SolveResult& res) {
  std::vector<std::string> errors;
  const auto& c = res.counters;
  for (std::size_t e = 0; e < inst.num_edges(); ++e) {
    if (c.l_scans[e] > 2)
      errors.push_back("edge " + std::to_string(e) + ": " +
                       std::to_string(c.l_scans[e]) + " L-scans");
    if (c.lprime_scans[e] > 1)
      errors.push_back("edge " + std::to_string(e) + ": " +
                       std::to_string(c.lprime_scans[e]) + " L'-scans");
  }
  if (c.total_proposals > 3 * inst.num_edges())
    errors.push_back("total_proposals " + std::to_string(c.total_proposals) +
                     " exceeds 3|E| = " + std::to_string(3 * inst.num_edges()));
  if (!res.trace.empty()) {
    std::vector<int> seen(inst.num_edges(), 0);
    for (const auto& ev : res.trace) {
      if (ev.kind != EventKind::Propose || ev.from_lprime) continue;
      int e = -1;
      if (res.proposer_side == Side::LeftU)
        e = inst.edge_id(ev.u, ev.w);
      else
        e = inst.edge_id(ev.w, ev.u);
      if (seen[e] == 0)
        seen[e] = ev.special ? 1 : 2;  // special first scan / consumed
      else if (seen[e] == 1)
        seen[e] = 3;  // second scan after a special first: legal
      else
        errors.push_back("edge " + std::to_string(e) +
                         ": L-scan after a consuming scan");
    }
  }
  return errors;
}

}  // namespace trace_check
