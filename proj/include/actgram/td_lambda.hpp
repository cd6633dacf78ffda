#pragma once

#include <unordered_map>
#include <vector>

#include "actgram/smdp_agent.hpp"

namespace actgram {

/// Watkins Q(lambda) over primitive actions with accumulating traces.
///
/// The next action is chosen after the update of the current step, so with
/// lambda = 0 the value stream (and the rng stream) matches one-step
/// Q-learning exactly. Traces are cut when the chosen action is not greedy
/// under the updated values.
class TdLambdaAgent {
 public:
  TdLambdaAgent(std::size_t num_actions, AgentConfig cfg);

  const AgentConfig& config() const { return cfg_; }
  QTable& q() { return q_; }
  const QTable& q() const { return q_; }
  std::span<const ActionId> active() const { return actions_; }

  /// Clears traces and picks the first action for the env's current state.
  void begin_episode(const Environment& env, Rng& rng);
  /// Takes the pending action, updates, then picks the next one.
  StepResult step(Environment& env, Rng& rng);
  ActionId pending() const { return pending_; }
  std::size_t live_traces() const { return traces_.size(); }

 private:
  ActionId choose(const Environment& env, Rng& rng) const;

  struct Key {
    StateId s;
    ActionId a;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept { return std::hash<StateId>{}(k.s * 31 + k.a); }
  };

  AgentConfig cfg_;
  QTable q_;
  std::vector<ActionId> actions_;
  std::unordered_map<Key, double, KeyHash> traces_;
  ActionId pending_ = 0;
};

}  // namespace actgram
