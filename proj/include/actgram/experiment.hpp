#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "actgram/config.hpp"
#include "actgram/environment.hpp"
#include "actgram/grammar.hpp"
#include "actgram/smdp_agent.hpp"
#include "json.hpp"

namespace actgram {

struct EpisodeRow {
  long episode = 0;
  long env_steps = 0;
  long decision_steps = 0;
  double ret = 0.0;
  long steps_to_goal = -1;  // greedy rollout length when it reaches the goal, else -1
  int active_macros = 0;
  int k = 0;                // k of the grammar currently in use, 0 before any
  long updates = 0;         // cumulative decision-level updates after the episode

  bool operator==(const EpisodeRow&) const = default;
};

struct InductionRecord {
  long episode = 0;  // episodes completed before the induction
  long updates = 0;
  int index = 0;     // grammar-update slot
  int k = 0;
  bool skipped = false;
  std::string note;
  std::size_t productions = 0;
  double compression = 1.0;
  double entropy_ratio = 1.0;
  std::vector<std::size_t> levenshtein;  // empty when no reference grammar exists
  std::vector<std::string> macros;       // active macro contents, rendered
  nlohmann::json grammar;                // dump of the induced grammar
};

struct SeedLog {
  std::uint64_t seed = 0;
  std::vector<EpisodeRow> episodes;
  std::vector<InductionRecord> inductions;
  std::size_t induction_calls = 0;
  long updates = 0;
  bool interrupted = false;
  nlohmann::json checkpoint;  // resumable state at the last episode boundary
};

struct RunLog {
  RunConfig config;
  std::vector<SeedLog> seeds;
};

/// round(k_start + (k_end - k_start) * min(index, n) / n), clamped to >= 2.
/// n = 0 means k_end from the start.
int k_schedule(int index, int k_start, int k_end, int num_updates);

/// `n` episodes on fresh copies of `proto`, macros written out as primitives.
/// Episodes cut by the step limit are kept with success = false.
std::vector<Trace> rollout(const Environment& proto, const SmdpAgent& agent, double epsilon, std::size_t n,
                           Rng& rng);

/// Greedy episode length when it reaches the goal, else -1.
long greedy_steps_to_goal(const Environment& proto, const SmdpAgent& agent, Rng& rng);

/// Reference grammar for distance metrics: 2-Sequitur on the optimal trace,
/// when the environment has one.
std::optional<Grammar> reference_grammar(const std::string& env_spec);

/// Macros for the expert paradigm from cfg.loop.expert_source.
std::vector<MacroAction> expert_macros(const RunConfig& cfg, const Environment& env, InductionRecord& record);
/// Macros for the transfer paradigm from cfg.loop.transfer_source.
std::vector<MacroAction> transfer_macros(const RunConfig& cfg, const Environment& env, InductionRecord& record);

struct SeedHooks {
  const std::atomic<bool>* stop = nullptr;
  /// Called with the partial log every checkpoint_every episodes.
  std::function<void(const SeedLog&)> on_checkpoint;
  /// Resume from a SeedLog checkpoint.
  const nlohmann::json* resume = nullptr;
};

SeedLog run_seed(const RunConfig& cfg, std::uint64_t seed, const SeedHooks& hooks = {});

struct RunOptions {
  const std::atomic<bool>* stop = nullptr;
  unsigned threads = 0;  // 0 = hardware concurrency
  std::function<void(const SeedLog&)> on_checkpoint;
  /// Checkpoint to resume a seed from, if any.
  std::function<std::optional<nlohmann::json>(std::uint64_t seed)> resume;
};

/// All seeds of `cfg` on parallel workers; results in seed order.
RunLog run_experiment(const RunConfig& cfg, const RunOptions& opts = {});

RunLog run_expert(RunConfig cfg);
RunLog run_transfer(RunConfig cfg);
RunLog run_online(RunConfig cfg);

/// First episode whose steps_to_goal equals `target`, -1 if none.
long episodes_to_reach(const SeedLog& log, long target);

nlohmann::json to_json(const EpisodeRow& row);
EpisodeRow episode_row_from_json(const nlohmann::json& j);
nlohmann::json to_json(const InductionRecord& rec);
InductionRecord induction_record_from_json(const nlohmann::json& j);

}  // namespace actgram
