#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "actgram/environment.hpp"
#include "actgram/grammar.hpp"
#include "actgram/qtable.hpp"

namespace actgram {

using Rng = std::mt19937_64;

struct AgentConfig {
  double alpha = 0.8;
  double gamma = 0.95;
  double epsilon = 0.1;
  double lambda = 0.0;  // eligibility decay, TD(lambda) baseline only
  bool mask_illegal = false;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const AgentConfig&) const = default;
};

struct PrimitiveStep {
  StateId s = 0;
  std::uint32_t action = 0;
  double reward = 0.0;
  StateId next = 0;
  bool terminal = false;
  bool illegal = false;
};

/// One decision: a primitive (duration 1) or a macro run open-loop.
struct MacroExecutionRecord {
  StateId s = 0;
  ActionId action = 0;
  double reward = 0.0;  // sum of gamma^(i-1) r_i over the executed steps
  StateId next = 0;
  std::size_t duration = 0;
  bool terminal = false;  // true terminal: zero bootstrap
  bool done = false;      // episode over, terminal or truncated
  bool success = false;
  std::vector<PrimitiveStep> steps;
};

/// Runs `actions` in order from the env's current state until they are used
/// up or the episode ends. Throws std::logic_error on a finished episode or an
/// empty action list.
MacroExecutionRecord execute_macro(Environment& env, ActionId id, std::span<const std::uint32_t> actions,
                                   double gamma);

/// Q(s,a) += alpha (r + gamma^tau max_active Q(s', .) - Q(s,a)), with a zero
/// bootstrap when `terminal`. Returns the new value.
double q_update(QTable& q, StateId s, ActionId a, double reward, StateId next, std::size_t tau, bool terminal,
                std::span<const ActionId> active, const AgentConfig& cfg);

/// Macro-level update of record.action only.
double smdp_q_update(QTable& q, const MacroExecutionRecord& rec, std::span<const ActionId> active,
                     const AgentConfig& cfg);

/// Macro-level update followed by one-step updates for every primitive step
/// in temporal order. A primitive decision gets just the single update.
/// Returns the number of entries updated.
std::size_t intra_macro_updates(QTable& q, const MacroExecutionRecord& rec, std::span<const ActionId> active,
                                const AgentConfig& cfg);

/// One uniform draw decides explore vs exploit; exploring draws an index into
/// `active`, exploiting draws among argmax ties only when there are several.
ActionId epsilon_greedy(const QTable& q, StateId s, std::span<const ActionId> active, double epsilon, Rng& rng);

/// SMDP Q-learner over primitives plus registered macros. Macro ids are
/// persistent: a content seen before gets its old id back, so its Q entries
/// survive deactivation.
class SmdpAgent {
 public:
  SmdpAgent(std::size_t num_primitives, AgentConfig cfg);

  const AgentConfig& config() const { return cfg_; }
  std::size_t num_primitives() const { return num_primitives_; }
  QTable& q() { return q_; }
  const QTable& q() const { return q_; }

  ActionId register_macro(const ActionSequence& actions);
  /// Active set becomes primitives plus these macros (registered as needed).
  std::vector<ActionId> set_active_macros(std::span<const MacroAction> macros);
  std::span<const ActionId> active() const { return active_; }
  std::vector<MacroAction> active_macros() const;
  std::size_t active_macro_count() const { return active_.size() - num_primitives_; }
  /// All registered contents, index = id - num_primitives.
  const std::vector<ActionSequence>& registry() const { return registry_; }
  ActionSequence content(ActionId id) const;

  /// Candidate actions in the env's current state; with mask_illegal, actions
  /// whose first primitive is illegal are dropped (unless none would remain).
  std::vector<ActionId> selectable(const Environment& env) const;
  ActionId select(const Environment& env, double epsilon, Rng& rng) const;
  MacroExecutionRecord act(Environment& env, ActionId id) const;
  /// Returns the number of Q entries updated.
  std::size_t learn(const MacroExecutionRecord& rec, bool intra_macro);

  nlohmann::json to_json() const;
  static SmdpAgent from_json(const nlohmann::json& j);

 private:
  std::size_t num_primitives_;
  AgentConfig cfg_;
  QTable q_;
  std::vector<ActionSequence> registry_;
  std::vector<ActionId> active_;
};

nlohmann::json to_json(const AgentConfig& cfg);
AgentConfig agent_config_from_json(const nlohmann::json& j);

}  // namespace actgram
