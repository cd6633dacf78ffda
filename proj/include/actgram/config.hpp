#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actgram/induction.hpp"
#include "actgram/smdp_agent.hpp"
#include "json.hpp"

namespace actgram {

/// expert / transfer / online use grammar macros; primitive and tdlambda are
/// the macro-free baselines.
enum class Paradigm { kExpert, kTransfer, kOnline, kPrimitive, kTdLambda };
std::string to_string(Paradigm p);
Paradigm paradigm_from_string(const std::string& s);

enum class BudgetUnit { kUpdates, kEpisodes };
std::string to_string(BudgetUnit u);
BudgetUnit budget_unit_from_string(const std::string& s);

struct LoopConfig {
  Paradigm paradigm = Paradigm::kOnline;
  long warmup = 5000;           // updates with primitives only before the first induction
  long grammar_interval = 0;    // updates between inductions; 0 = env default
  int k_start = 6;
  int k_end = 2;
  int num_grammar_updates = 0;  // inductions over which k decays; 0 = all scheduled ones
  int n_g = 1;                  // successful greedy rollouts per induction
  long budget = 0;              // 0 = env default
  BudgetUnit budget_unit = BudgetUnit::kUpdates;
  bool intra_macro = true;
  bool replay = false;
  int replay_batch = 4;
  long replay_capacity = 100000;
  bool eval_greedy = true;      // steps_to_goal from a greedy rollout after each episode
  std::string expert_source = "optimal";  // optimal | trace:PATH | checkpoint:PATH
  std::string transfer_source;            // grammar dump path or hanoi:N
  long checkpoint_every = 0;    // episodes between checkpoints; 0 = only at the end

  bool operator==(const LoopConfig&) const = default;
};

struct RunConfig {
  std::string env = "hanoi:5";
  AgentConfig agent;
  InductionConfig induction{InductionAlgorithm::kSequitur, 2, 0};  // l 0 = env default
  LoopConfig loop;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::string out;  // empty = <output root>/<paradigm>-<env>

  /// Fills env-dependent defaults (l, grammar_interval, budget, out).
  void resolve();
  /// Throws ConfigError naming the offending field.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Number of scheduled induction slots, warmup + i * interval < budget.
/// Only meaningful for update budgets.
long scheduled_inductions(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);
/// `file` overlaid with `overrides` (JSON merge patch), defaults resolved and
/// validated. Unknown fields and bad values throw ConfigError.
RunConfig parse_config(const nlohmann::json& file, const nlohmann::json& overrides = nlohmann::json::object());
RunConfig load_config(const std::string& path, const nlohmann::json& overrides = nlohmann::json::object());

/// Sets a dotted key ("agent.alpha") in `patch`, parsing `value` as JSON and
/// falling back to a plain string. `as_string` skips the JSON parse.
void set_override(nlohmann::json& patch, const std::string& dotted_key, const std::string& value,
                  bool as_string = false);

/// $ACTGRAM_OUTPUT_ROOT, or "runs".
std::string default_output_root();

}  // namespace actgram
