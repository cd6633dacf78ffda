#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "actgram/experiment.hpp"

namespace actgram {

/// Fixed-precision number formatting used in every CSV, so output is
/// byte-stable for a given run.
std::string format_number(double v);

/// Header: episode,env_steps,decision_steps,return,steps_to_goal,active_macros,k
void write_seed_csv(const SeedLog& log, std::ostream& out);
/// One row per induction attempt, skipped ones included.
void write_inductions_csv(const SeedLog& log, std::ostream& out);

struct AggregateRow {
  long episode = 0;
  std::size_t seeds = 0;  // seeds that reached this episode
  double return_median = 0, return_p10 = 0, return_p90 = 0;
  double env_steps_median = 0, env_steps_p10 = 0, env_steps_p90 = 0;
  double decision_steps_median = 0, decision_steps_p10 = 0, decision_steps_p90 = 0;
  double solved_fraction = 0;  // seeds whose greedy rollout reached the goal
};

std::vector<AggregateRow> aggregate(const std::vector<SeedLog>& seeds);
void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out);

/// Per-seed partial output: seed_<s>.csv, seed_<s>_inductions.csv, grammar
/// dumps and checkpoint. Safe to call concurrently for different seeds.
void emit_seed(const SeedLog& log, const std::filesystem::path& dir);

/// config.json, every seed's files and aggregate.csv. Throws
/// std::runtime_error when `dir` cannot be written.
void emit_run_log(const RunLog& log, const std::filesystem::path& dir);

}  // namespace actgram
