#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "actgram/environment.hpp"
#include "actgram/symbol.hpp"

namespace actgram::hanoi {

constexpr int kMinDisks = 2;
constexpr int kMaxDisks = 12;
constexpr double kGoalReward = 100.0;

/// Letter a..f -> (from peg, to peg). The assignment is the unique bijection
/// under which the recursive 5-disk solution spells
/// "bafbcdbafecfbafbcdbcfecdbafbcdb"; see the derivation test.
constexpr std::array<std::pair<int, int>, 6> kMoves{{{0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}}};

/// Peg of each disk, disk 0 smallest. Only the top disk of a peg can move,
/// so any assignment is a legal configuration.
struct HanoiState {
  std::vector<std::uint8_t> pegs;

  int disks() const { return static_cast<int>(pegs.size()); }
  StateId id() const;
  bool is_goal() const;
  /// Smallest disk on `peg`, or -1 if empty.
  int top(int peg) const;
  bool operator==(const HanoiState&) const = default;
};

struct HanoiOutcome {
  HanoiState next;
  double reward = 0.0;
  bool done = false;
  bool illegal = false;
};

/// Throws ConfigError unless kMinDisks <= n <= kMaxDisks.
HanoiState hanoi_reset(int n);
HanoiState state_from_id(StateId id, int n);
std::size_t state_count(int n);

bool is_legal(const HanoiState& s, std::uint32_t action);
/// Illegal moves leave the state unchanged with the illegal flag set.
HanoiOutcome hanoi_step(const HanoiState& s, std::uint32_t action);

/// Classical recursive solution moving all disks from peg 0 to peg 2.
Trace hanoi_optimal_trace(int n);

Alphabet alphabet();

class HanoiEnv : public Environment {
 public:
  explicit HanoiEnv(int disks);

  std::string name() const override;
  const Alphabet& alphabet() const override { return alphabet_; }
  StateId reset() override;
  StepResult step(std::uint32_t action) override;
  StateId state() const override { return state_.id(); }
  bool done() const override { return done_; }
  bool is_legal(std::uint32_t action) const override;
  std::size_t step_limit() const override { return limit_; }
  std::size_t steps() const override { return steps_; }
  std::size_t optimal_steps() const override { return (std::size_t{1} << disks_) - 1; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<HanoiEnv>(*this); }

  const HanoiState& hanoi_state() const { return state_; }
  int disks() const { return disks_; }

 private:
  int disks_;
  Alphabet alphabet_;
  HanoiState state_;
  std::size_t limit_;
  std::size_t steps_ = 0;
  bool done_ = false;
};

}  // namespace actgram::hanoi
