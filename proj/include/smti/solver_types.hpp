#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "smti/core.hpp"
#include "smti/rng.hpp"

namespace smti {

// Order in which free proposers take turns. The guarantees hold for every
// policy; only the particular matching may differ.
enum class SchedulePolicy { LifoStack, FifoQueue, RandomOrder, Scripted };

struct SolveOptions {
  SchedulePolicy policy = SchedulePolicy::LifoStack;
  // Tie-break and RandomOrder stream. Seed 0 keeps the input tie order.
  std::uint64_t seed = 0;
  // Proposer turns for Scripted (0-based proposer ids, one entry per
  // proposal); once exhausted the run finishes in LIFO order.
  std::vector<int> script;
  bool trace = false;
  // b-matching only: relocate a responder to tie tails on her first match
  // instead of her first saturation (the two coincide at unit capacities).
  bool literal_relocation = false;
};

class ScheduleError : public std::runtime_error {
 public:
  explicit ScheduleError(const std::string& what) : std::runtime_error(what) {}
};

class CapacityError : public std::runtime_error {
 public:
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

struct Counters {
  std::vector<std::uint8_t> l_scans;       // per edge id: proposals from L
  std::vector<std::uint8_t> lprime_scans;  // per edge id: proposals from L'
  std::uint64_t total_proposals = 0;
  // b-matching only: each responder-queue operation weighted by
  // log2(max(2, b(w))) of the queue it touches.
  double queue_ops_logweighted = 0.0;
};

enum class EventKind {
  Propose,
  AcceptUnsaturated,  // responder had spare capacity
  InsecureSwap,       // insecure responder accepts; displaced partner takes a satellite
  AcceptStrict,       // responder strictly prefers proposer to her worst partner
  Defer,              // responder appended to proposer's L'
  AcceptFromLPrime,   // uneasy responder displaced an equally-good partner
  Reject,
  EvictDefer,  // after an eviction, responder re-queued on the evictee's L'
};

struct TraceEvent {
  EventKind kind{};
  int u = -1, w = -1;   // proposer / responder (proposer side first)
  int u2 = -1, w2 = -1;  // displaced agent / satellite, when applicable
  bool special = false;
  bool from_lprime = false;
  bool target_insecure = false;   // responder insecure when proposed to
  bool becomes_insecure = false;  // responder insecure right after accepting
  bool evicted_subsat = false;    // displaced agent subsatellitic at the event
  bool proposer_subsat = false;
};

struct SolveResult {
  Matching matching;
  Counters counters;
  std::vector<TraceEvent> trace;
  // Side that proposed. solve_b may internally transpose the instance so the
  // smaller-capacity side proposes; trace agents are reported in that
  // orientation while `matching` is always in the original one.
  Side proposer_side = Side::LeftU;
};

namespace detail {

// Worklist of free proposers under a SchedulePolicy. Entries may go stale
// (agent matched or out of work); callers skip those on pop.
class Scheduler {
 public:
  Scheduler(SchedulePolicy policy, std::uint64_t seed, std::vector<int> script)
      : policy_(policy), script_(std::move(script)), rng_(seed ^ 0x5c576e6f726d616cULL) {}

  void push(int u) { pool_.push_back(u); }

  // Returns -1 when exhausted. `runnable(u)` tells whether u is free with
  // work left; scripted turns must name runnable agents.
  template <class Runnable>
  int next(const Runnable& runnable) {
    while (script_pos_ < script_.size()) {
      int u = script_[script_pos_++];
      if (!runnable(u))
        throw ScheduleError("scripted turn " + std::to_string(script_pos_) +
                            " names m" + std::to_string(u + 1) +
                            ", who is not free with a nonempty list");
      return u;
    }
    while (!pool_.empty()) {
      int u;
      switch (policy_) {
        case SchedulePolicy::FifoQueue:
          u = pool_.front();
          pool_.erase(pool_.begin());
          break;
        case SchedulePolicy::RandomOrder: {
          std::size_t i = rng_.below(pool_.size());
          u = pool_[i];
          pool_[i] = pool_.back();
          pool_.pop_back();
          break;
        }
        default:  // LifoStack; also finishes Scripted runs
          u = pool_.back();
          pool_.pop_back();
          break;
      }
      if (runnable(u)) return u;
    }
    return -1;
  }

 private:
  SchedulePolicy policy_;
  std::vector<int> script_;
  std::size_t script_pos_ = 0;
  std::vector<int> pool_;
  SplitMix64 rng_;
};

}  // namespace detail
}  // namespace smti
