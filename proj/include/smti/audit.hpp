#pragma once

#include <algorithm>
#include <vector>

#include "smti/core.hpp"

// Definition-direct checks of a (Instance, Matching) pair: validity, blocking
// pairs, and masculine/feminine dangerous paths, under the capacitated
// definitions (one-to-one is the b(v) = 1 special case). These run on test
// corpora, not inside solver loops, so clarity wins over asymptotics.

namespace smti {

struct DangerousPath {
  int w, u1, w1, u;  // (w, u1, w1, u): (u1,w1) matched, w and u unsaturated
  bool masculine = false;  // u1 indifferent between w and w1
  bool feminine = false;   // w1 indifferent between u and u1
  friend bool operator==(const DangerousPath&, const DangerousPath&) = default;
};

struct AuditReport {
  bool valid = false;
  std::vector<std::pair<int, int>> blocking_pairs;  // (u, w), lexicographic
  std::vector<DangerousPath> dangerous_paths;       // lexicographic by (w,u1,w1,u)
  bool stable() const { return valid && blocking_pairs.empty(); }
  bool dangerous_free() const { return dangerous_paths.empty(); }
};

namespace detail {

struct MatchView {
  std::vector<std::vector<int>> left_partners, right_partners;
  std::vector<int> degl, degr;

  MatchView(const Instance& inst, const Matching& m)
      : left_partners(m.partners(Side::LeftU, inst)),
        right_partners(m.partners(Side::RightW, inst)),
        degl(m.degrees(Side::LeftU, inst)),
        degr(m.degrees(Side::RightW, inst)) {}

  bool unsat_left(const Instance& inst, int u) const {
    return degl[u] < inst.capacity(Side::LeftU, u);
  }
  bool unsat_right(const Instance& inst, int w) const {
    return degr[w] < inst.capacity(Side::RightW, w);
  }
  // Worst (largest) rank among u's partners; -1 when unmatched.
  int worst_rank_left(const Instance& inst, int u) const {
    int worst = -1;
    for (int w : left_partners[u])
      worst = std::max(worst, *inst.rank_of({Side::LeftU, u}, w));
    return worst;
  }
  int worst_rank_right(const Instance& inst, int w) const {
    int worst = -1;
    for (int u : right_partners[w])
      worst = std::max(worst, *inst.rank_of({Side::RightW, w}, u));
    return worst;
  }
};

}  // namespace detail

// All blocking edges in deterministic (u, w) lexicographic order. A pair
// (u, w) not in M blocks when u is unsaturated or prefers w to one of his
// partners, and symmetrically for w.
inline std::vector<std::pair<int, int>> find_blocking_pairs(const Instance& inst,
                                                            const Matching& m) {
  if (!is_valid_matching(inst, m))
    throw InvalidMatching("find_blocking_pairs: matching violates instance constraints");
  detail::MatchView view(inst, m);
  std::vector<int> worstl(inst.n_left()), worstr(inst.n_right());
  for (int u = 0; u < inst.n_left(); ++u) worstl[u] = view.worst_rank_left(inst, u);
  for (int w = 0; w < inst.n_right(); ++w) worstr[w] = view.worst_rank_right(inst, w);

  std::vector<std::pair<int, int>> out;
  for (const auto& e : inst.edges()) {
    if (m.contains(e.left, e.right)) continue;
    bool u_wants = view.unsat_left(inst, e.left) || worstl[e.left] > e.rank_left;
    bool w_wants = view.unsat_right(inst, e.right) || worstr[e.right] > e.rank_right;
    if (u_wants && w_wants) out.emplace_back(e.left, e.right);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// All 4-vertex dangerous paths (w, u1, w1, u): (u1, w1) in M with both
// saturated, (w, u1) and (w1, u) acceptable non-M edges with w and u
// unsaturated, and (u1, w1) not blocking for the swapped matching
// M' = M \ (u1,w1) + (w,u1) + (w1,u). Computed for any valid matching, stable
// or not.
inline std::vector<DangerousPath> find_dangerous_paths(const Instance& inst,
                                                       const Matching& m) {
  if (!is_valid_matching(inst, m))
    throw InvalidMatching("find_dangerous_paths: matching violates instance constraints");
  detail::MatchView view(inst, m);

  std::vector<DangerousPath> out;
  for (auto [u1, w1] : m.edges()) {
    if (view.unsat_left(inst, u1) || view.unsat_right(inst, w1)) continue;
    int r_u1_w1 = *inst.rank_of({Side::LeftU, u1}, w1);
    int r_w1_u1 = *inst.rank_of({Side::RightW, w1}, u1);
    for (const auto& eu : inst.adjacency(Side::LeftU, u1)) {
      int w = eu.partner;
      if (!view.unsat_right(inst, w) || m.contains(u1, w)) continue;
      for (const auto& ew : inst.adjacency(Side::RightW, w1)) {
        int u = ew.partner;
        if (!view.unsat_left(inst, u) || m.contains(u, w1)) continue;
        // (u1, w1) blocking for M'? In M' agent u1 swaps w1 for w, w1 swaps
        // u1 for u; both stay saturated.
        int worst_u1 = eu.tie;  // rank of w for u1
        for (int wp : view.left_partners[u1])
          if (wp != w1) worst_u1 = std::max(worst_u1, *inst.rank_of({Side::LeftU, u1}, wp));
        int worst_w1 = ew.tie;  // rank of u for w1
        for (int up : view.right_partners[w1])
          if (up != u1) worst_w1 = std::max(worst_w1, *inst.rank_of({Side::RightW, w1}, up));
        bool blocking_for_swapped = worst_u1 > r_u1_w1 && worst_w1 > r_w1_u1;
        if (blocking_for_swapped) continue;
        DangerousPath p{w, u1, w1, u};
        p.masculine = eu.tie == r_u1_w1;
        p.feminine = ew.tie == r_w1_u1;
        out.push_back(p);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const DangerousPath& a, const DangerousPath& b) {
    return std::tie(a.w, a.u1, a.w1, a.u) < std::tie(b.w, b.u1, b.w1, b.u);
  });
  return out;
}

inline AuditReport audit(const Instance& inst, const Matching& m) {
  AuditReport r;
  r.valid = is_valid_matching(inst, m);
  if (!r.valid) return r;
  r.blocking_pairs = find_blocking_pairs(inst, m);
  r.dangerous_paths = find_dangerous_paths(inst, m);
  return r;
}

struct ApproxCertificate {
  bool stable = false;
  bool dangerous_free = false;
  // Both flags true guarantee 2|M_opt| <= 3|M| with no oracle needed.
  bool certified() const { return stable && dangerous_free; }
};

// Dangerous paths are defined wrt a stable matching, so the second flag is
// only claimed once the first holds.
inline ApproxCertificate approx_certificate(const Instance& inst, const Matching& m) {
  AuditReport r = audit(inst, m);
  return {r.stable(), r.stable() && r.dangerous_free()};
}

}  // namespace smti
