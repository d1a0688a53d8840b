#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace smti {

enum class Side { LeftU, RightW };

constexpr Side opposite(Side s) {
  return s == Side::LeftU ? Side::RightW : Side::LeftU;
}

inline const char* side_tag(Side s) { return s == Side::LeftU ? "m" : "w"; }

struct AgentId {
  Side side = Side::LeftU;
  int index = 0;
  friend bool operator==(const AgentId&, const AgentId&) = default;
};

// A preference list is an ordered sequence of tie groups, most preferred
// first; group members are 0-based indices into the opposite side. Members of
// one group are mutually indifferent.
using PreferenceList = std::vector<std::vector<int>>;

struct ValidationError {
  enum class Kind {
    NonMutual,
    DuplicateEntry,
    IndexOutOfRange,
    EmptyTie,
    NegativeCapacity,
    BadShape,
  };
  Kind kind = Kind::BadShape;
  AgentId judge{};
  int candidate = -1;
  std::string message;
};

class InvalidInstance : public std::runtime_error {
 public:
  explicit InvalidInstance(ValidationError e)
      : std::runtime_error(e.message), error(std::move(e)) {}
  ValidationError error;
};

class InvalidMatching : public std::runtime_error {
 public:
  explicit InvalidMatching(const std::string& what) : std::runtime_error(what) {}
};

// Raw instance description: agents are dense 0-based ids per side. Empty
// capacity vectors mean b(v) = 1 for everyone.
struct InstanceData {
  int n_left = 0;
  int n_right = 0;
  std::vector<PreferenceList> prefs_left;   // size n_left
  std::vector<PreferenceList> prefs_right;  // size n_right
  std::vector<int> cap_left;                // empty or size n_left
  std::vector<int> cap_right;               // empty or size n_right
};

namespace detail {
inline std::uint64_t edge_key(int l, int r) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(l)) << 32) |
         static_cast<std::uint32_t>(r);
}
}  // namespace detail

// Checks all InstanceData invariants; returns the first violation found.
inline std::optional<ValidationError> validate(const InstanceData& d) {
  using K = ValidationError::Kind;
  auto err = [](K k, AgentId j, int c, std::string msg) {
    return ValidationError{k, j, c, std::move(msg)};
  };
  if (d.n_left < 0 || d.n_right < 0 ||
      static_cast<int>(d.prefs_left.size()) != d.n_left ||
      static_cast<int>(d.prefs_right.size()) != d.n_right)
    return err(K::BadShape, {}, -1, "preference table shape does not match agent counts");
  for (Side side : {Side::LeftU, Side::RightW}) {
    const auto& caps = side == Side::LeftU ? d.cap_left : d.cap_right;
    int n = side == Side::LeftU ? d.n_left : d.n_right;
    if (!caps.empty() && static_cast<int>(caps.size()) != n)
      return err(K::BadShape, {side, 0}, -1, "capacity vector has wrong length");
    for (int i = 0; i < static_cast<int>(caps.size()); ++i)
      if (caps[i] < 0)
        return err(K::NegativeCapacity, {side, i}, -1,
                   std::string(side_tag(side)) + std::to_string(i + 1) +
                       " has negative capacity");
  }
  for (Side side : {Side::LeftU, Side::RightW}) {
    const auto& prefs = side == Side::LeftU ? d.prefs_left : d.prefs_right;
    int n_other = side == Side::LeftU ? d.n_right : d.n_left;
    for (int j = 0; j < static_cast<int>(prefs.size()); ++j) {
      std::unordered_set<int> seen;
      for (const auto& tie : prefs[j]) {
        if (tie.empty())
          return err(K::EmptyTie, {side, j}, -1,
                     std::string("empty tie on list of ") + side_tag(side) +
                         std::to_string(j + 1));
        for (int c : tie) {
          if (c < 0 || c >= n_other)
            return err(K::IndexOutOfRange, {side, j}, c,
                       std::string("out-of-range entry on list of ") +
                           side_tag(side) + std::to_string(j + 1));
          if (!seen.insert(c).second)
            return err(K::DuplicateEntry, {side, j}, c,
                       std::string(side_tag(opposite(side))) + std::to_string(c + 1) +
                           " listed twice by " + side_tag(side) + std::to_string(j + 1));
        }
      }
    }
  }
  // Mutual acceptability: w on L_m iff m on L_w.
  std::unordered_set<std::uint64_t> from_left;
  for (int m = 0; m < d.n_left; ++m)
    for (const auto& tie : d.prefs_left[m])
      for (int w : tie) from_left.insert(detail::edge_key(m, w));
  std::size_t right_edges = 0;
  for (int w = 0; w < d.n_right; ++w)
    for (const auto& tie : d.prefs_right[w])
      for (int m : tie) {
        ++right_edges;
        if (!from_left.count(detail::edge_key(m, w)))
          return err(K::NonMutual, {Side::RightW, w}, m,
                     "m" + std::to_string(m + 1) + " not listed back by w" +
                         std::to_string(w + 1));
      }
  if (right_edges != from_left.size()) {
    // Some left entry has no counterpart; locate it for the report.
    std::unordered_set<std::uint64_t> from_right;
    for (int w = 0; w < d.n_right; ++w)
      for (const auto& tie : d.prefs_right[w])
        for (int m : tie) from_right.insert(detail::edge_key(m, w));
    for (int m = 0; m < d.n_left; ++m)
      for (const auto& tie : d.prefs_left[m])
        for (int w : tie)
          if (!from_right.count(detail::edge_key(m, w)))
            return err(K::NonMutual, {Side::LeftU, m}, w,
                       "w" + std::to_string(w + 1) + " not listed back by m" +
                           std::to_string(m + 1));
  }
  return std::nullopt;
}

// Immutable validated instance with O(1) rank lookups along edges. Edges get
// dense ids in left-list order; each edge record carries the tie index of
// both endpoints on each other's lists plus both list positions, which is all
// the solvers ever need.
class Instance {
 public:
  struct Edge {
    int left, right;
    int rank_left;   // tie index of `right` on left agent's list
    int rank_right;  // tie index of `left` on right agent's list
    int pos_left;    // flat position of `right` on left agent's list
    int pos_right;   // flat position of `left` on right agent's list
  };
  struct Entry {
    int partner;     // opposite-side agent at this list position
    int tie;         // tie index on the owner's list
    int cross_rank;  // tie index of the owner on partner's list
    int cross_pos;   // flat position of the owner on partner's list
    int edge;        // global edge id
  };

  static Instance create(InstanceData d) {
    if (auto e = validate(d)) throw InvalidInstance(*e);
    return Instance(std::move(d));
  }

  int n_left() const { return data_.n_left; }
  int n_right() const { return data_.n_right; }
  int n(Side s) const { return s == Side::LeftU ? data_.n_left : data_.n_right; }
  std::size_t num_edges() const { return edges_.size(); }

  const InstanceData& data() const { return data_; }
  const PreferenceList& prefs(Side s, int i) const {
    return s == Side::LeftU ? data_.prefs_left[i] : data_.prefs_right[i];
  }
  int capacity(Side s, int i) const {
    const auto& caps = s == Side::LeftU ? data_.cap_left : data_.cap_right;
    return caps.empty() ? 1 : caps[i];
  }
  int max_capacity(Side s) const {
    int mx = 0;
    for (int i = 0; i < n(s); ++i) mx = std::max(mx, capacity(s, i));
    return mx;
  }
  bool unit_capacities() const {
    for (Side s : {Side::LeftU, Side::RightW})
      for (int i = 0; i < n(s); ++i)
        if (capacity(s, i) != 1) return false;
    return true;
  }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int id) const { return edges_[id]; }
  // -1 when (l, r) is not an edge.
  int edge_id(int l, int r) const {
    auto it = edge_index_.find(detail::edge_key(l, r));
    return it == edge_index_.end() ? -1 : it->second;
  }

  const std::vector<Entry>& adjacency(Side s, int i) const {
    return s == Side::LeftU ? adj_left_[i] : adj_right_[i];
  }

  // Tie-group index of `candidate` on `judge`'s list; nullopt when
  // unacceptable. Smaller is better; equal ranks mean indifference.
  std::optional<int> rank_of(AgentId judge, int candidate) const {
    int id = judge.side == Side::LeftU ? edge_id(judge.index, candidate)
                                       : edge_id(candidate, judge.index);
    if (id < 0) return std::nullopt;
    return judge.side == Side::LeftU ? edges_[id].rank_left : edges_[id].rank_right;
  }

  // Same instance with the two sides exchanged.
  Instance transposed() const {
    InstanceData t;
    t.n_left = data_.n_right;
    t.n_right = data_.n_left;
    t.prefs_left = data_.prefs_right;
    t.prefs_right = data_.prefs_left;
    t.cap_left = data_.cap_right;
    t.cap_right = data_.cap_left;
    return Instance(std::move(t));
  }

 private:
  explicit Instance(InstanceData d) : data_(std::move(d)) {
    adj_left_.resize(data_.n_left);
    adj_right_.resize(data_.n_right);
    std::vector<int> fill_right(data_.n_right, 0);
    // Pre-size right adjacencies so positions follow right-list order.
    std::vector<std::pair<int, int>> right_slot(0);
    std::unordered_map<std::uint64_t, std::pair<int, int>> right_pos;  // (tie, pos)
    right_pos.reserve(64);
    for (int w = 0; w < data_.n_right; ++w) {
      int pos = 0;
      for (int t = 0; t < static_cast<int>(data_.prefs_right[w].size()); ++t)
        for (int m : data_.prefs_right[w][t])
          right_pos[detail::edge_key(m, w)] = {t, pos++};
      adj_right_[w].resize(pos);
    }
    for (int m = 0; m < data_.n_left; ++m) {
      int pos = 0;
      for (int t = 0; t < static_cast<int>(data_.prefs_left[m].size()); ++t)
        for (int w : data_.prefs_left[m][t]) {
          auto [rt, rp] = right_pos.at(detail::edge_key(m, w));
          int id = static_cast<int>(edges_.size());
          edges_.push_back(Edge{m, w, t, rt, pos, rp});
          edge_index_.emplace(detail::edge_key(m, w), id);
          adj_left_[m].push_back(Entry{w, t, rt, rp, id});
          adj_right_[w][rp] = Entry{m, rt, t, pos, id};
          ++pos;
        }
    }
  }

  InstanceData data_;
  std::vector<Edge> edges_;
  std::unordered_map<std::uint64_t, int> edge_index_;
  std::vector<std::vector<Entry>> adj_left_, adj_right_;
};

// A set of (left, right) edges, kept sorted. Capacity and acceptability are
// properties checked against an Instance, not enforced here.
class Matching {
 public:
  Matching() = default;
  explicit Matching(std::vector<std::pair<int, int>> edges)
      : edges_(std::move(edges)) {
    std::sort(edges_.begin(), edges_.end());
  }

  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  bool empty() const { return edges_.empty(); }
  bool contains(int l, int r) const {
    return std::binary_search(edges_.begin(), edges_.end(), std::make_pair(l, r));
  }
  friend bool operator==(const Matching&, const Matching&) = default;

  std::vector<int> degrees(Side s, const Instance& inst) const {
    std::vector<int> deg(inst.n(s), 0);
    for (auto [l, r] : edges_) ++deg[s == Side::LeftU ? l : r];
    return deg;
  }

  // Partner lists per agent on side s (multi-valued for b-matchings).
  std::vector<std::vector<int>> partners(Side s, const Instance& inst) const {
    std::vector<std::vector<int>> p(inst.n(s));
    for (auto [l, r] : edges_)
      s == Side::LeftU ? p[l].push_back(r) : p[r].push_back(l);
    return p;
  }

  Matching transposed() const {
    std::vector<std::pair<int, int>> e;
    e.reserve(edges_.size());
    for (auto [l, r] : edges_) e.emplace_back(r, l);
    return Matching(std::move(e));
  }

 private:
  std::vector<std::pair<int, int>> edges_;
};

inline bool is_valid_matching(const Instance& inst, const Matching& m) {
  std::vector<int> degl(inst.n_left(), 0), degr(inst.n_right(), 0);
  const std::pair<int, int>* prev = nullptr;
  for (const auto& e : m.edges()) {
    auto [l, r] = e;
    if (prev && *prev == e) return false;  // duplicate edge
    prev = &e;
    if (l < 0 || l >= inst.n_left() || r < 0 || r >= inst.n_right()) return false;
    if (inst.edge_id(l, r) < 0) return false;  // not mutually acceptable
    if (++degl[l] > inst.capacity(Side::LeftU, l)) return false;
    if (++degr[r] > inst.capacity(Side::RightW, r)) return false;
  }
  return true;
}

}  // namespace smti
