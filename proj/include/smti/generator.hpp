#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "smti/core.hpp"
#include "smti/rng.hpp"

// Deterministic random instance generation. All randomness flows through one
// SplitMix64 stream seeded from params.seed, so the same params give the same
// instance bytes on every platform.

namespace smti {

struct GenParams {
  int n_left = 4;
  int n_right = 4;
  int list_min = 1;     // desired degree range per left agent
  int list_max = 3;     // clamped to n_right
  double tie_density = 0.0;  // chance each adjacent list pair merges into a tie
  int cap_max_left = 1;      // capacities drawn uniformly from 1..cap_max
  int cap_max_right = 1;
  std::uint64_t seed = 1;
};

// The worked 4x4 example used throughout the tests: m1 ties w1 with w2,
// w3 ties m2 with m4, and the unique maximum stable matching is perfect.
inline Instance worked_example() {
  InstanceData d;
  d.n_left = 4;
  d.n_right = 4;
  d.prefs_left = {
      {{0, 1}, {2}},      // m1: (w1 w2) w3
      {{0}, {2}, {3}},    // m2: w1 w3 w4
      {{1}, {0}, {2}},    // m3: w2 w1 w3
      {{2}},              // m4: w3
  };
  d.prefs_right = {
      {{0}, {1}, {2}},    // w1: m1 m2 m3
      {{2}, {0}},         // w2: m3 m1
      {{0}, {1, 3}, {2}}, // w3: m1 (m2 m4) m3
      {{1}},              // w4: m2
  };
  return Instance::create(std::move(d));
}

inline Instance random_instance(const GenParams& p) {
  if (p.n_left <= 0 || p.n_right <= 0) throw std::invalid_argument("gen: empty side");
  if (p.list_min < 0 || p.list_min > p.list_max)
    throw std::invalid_argument("gen: bad list length range");
  if (p.cap_max_left < 1 || p.cap_max_right < 1)
    throw std::invalid_argument("gen: cap_max must be >= 1");
  if (p.tie_density < 0.0 || p.tie_density > 1.0)
    throw std::invalid_argument("gen: tie_density must be in [0,1]");

  SplitMix64 rng(p.seed);

  // Pick each left agent's neighbor set by a partial Fisher-Yates over a
  // shared scratch permutation, undone after each draw so the scratch stays
  // the identity. This keeps the whole edge sampling O(sum of degrees).
  std::vector<int> scratch(p.n_right);
  std::iota(scratch.begin(), scratch.end(), 0);
  std::vector<std::vector<int>> neigh_left(p.n_left);
  std::vector<std::vector<int>> neigh_right(p.n_right);
  const int lo = std::min(p.list_min, p.n_right);
  const int hi = std::min(p.list_max, p.n_right);
  for (int u = 0; u < p.n_left; ++u) {
    int k = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    auto& nb = neigh_left[u];
    nb.reserve(k);
    std::vector<std::pair<int, int>> swaps;
    swaps.reserve(k);
    for (int i = 0; i < k; ++i) {
      int j = i + rng.below_int(p.n_right - i);
      std::swap(scratch[i], scratch[j]);
      swaps.emplace_back(i, j);
      nb.push_back(scratch[i]);
    }
    // undo in reverse, restoring the identity permutation for the next agent
    for (auto it = swaps.rbegin(); it != swaps.rend(); ++it)
      std::swap(scratch[it->first], scratch[it->second]);
    for (int w : nb) neigh_right[w].push_back(u);
  }

  // Preference order: a fresh shuffle per agent, then adjacent entries merge
  // into the running tie with probability tie_density.
  auto build_prefs = [&](std::vector<std::vector<int>>& neigh) {
    std::vector<std::vector<std::vector<int>>> prefs(neigh.size());
    for (std::size_t a = 0; a < neigh.size(); ++a) {
      auto order = neigh[a];
      rng.shuffle(order);
      auto& pl = prefs[a];
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || rng.next_double() >= p.tie_density)
          pl.emplace_back();
        pl.back().push_back(order[i]);
      }
    }
    return prefs;
  };

  InstanceData d;
  d.n_left = p.n_left;
  d.n_right = p.n_right;
  d.prefs_left = build_prefs(neigh_left);
  d.prefs_right = build_prefs(neigh_right);
  if (p.cap_max_left > 1) {
    d.cap_left.resize(p.n_left);
    for (auto& c : d.cap_left) c = 1 + rng.below_int(p.cap_max_left);
  }
  if (p.cap_max_right > 1) {
    d.cap_right.resize(p.n_right);
    for (auto& c : d.cap_right) c = 1 + rng.below_int(p.cap_max_right);
  }
  return Instance::create(std::move(d));
}

}  // namespace smti
