#pragma once

#include <deque>
#include <map>
#include <ostream>
#include <span>
#include <vector>

#include "actgram/smdp_agent.hpp"

namespace actgram {

struct Transition {
  StateId s = 0;
  ActionId action = 0;
  double reward = 0.0;
  StateId next = 0;
  std::size_t duration = 1;
  bool terminal = false;
  bool active = true;

  bool operator==(const Transition&) const = default;
};

/// FIFO experience buffer with an on/off flag per action id. Primitive ids
/// are always on; only on transitions are sampled.
class GrammarReplayBuffer {
 public:
  static constexpr std::size_t kDefaultCapacity = 100000;

  explicit GrammarReplayBuffer(std::size_t num_primitives, std::size_t capacity = kDefaultCapacity);

  void push(const Transition& t);
  /// Stores the decision-level transition and, for a macro, each of its
  /// primitive steps as a one-step transition.
  void push(const MacroExecutionRecord& rec);

  /// Macros in `macro_ids` become on, every other macro id off.
  void set_active(std::span<const ActionId> macro_ids);
  bool is_active(ActionId id) const;

  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t active_size() const;

  /// `n` draws with replacement, uniform over on transitions.
  /// Throws EmptyBufferError when nothing is on.
  std::vector<Transition> sample(std::size_t n, Rng& rng) const;

  /// One JSON object per line, oldest first.
  void dump_ndjson(std::ostream& out) const;

 private:
  std::size_t num_primitives_;
  std::size_t capacity_;
  std::deque<ActionId> order_;                         // action id of each slot, oldest first
  std::map<ActionId, std::deque<Transition>> by_action_;  // per-id FIFO
  std::vector<ActionId> active_macros_;                // sorted
};

}  // namespace actgram
