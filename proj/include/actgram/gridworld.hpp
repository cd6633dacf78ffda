#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "actgram/environment.hpp"

namespace actgram::grid {

constexpr int kRows = 10;
constexpr int kCols = 20;
constexpr std::size_t kStepLimit = 500;
constexpr double kFoodReward = 1.0;
constexpr double kPoisonReward = -1.0;
constexpr double kCollisionReward = -5.0;
constexpr double kCompletionBonus = 5.0;

enum Action : std::uint32_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

struct Cell {
  int row = 0;
  int col = 0;
  bool operator==(const Cell&) const = default;
  auto operator<=>(const Cell&) const = default;
};

/// Block patrolling a straight path: p0, p1, ..., p_{m-1}, p_{m-2}, ..., p1.
struct Block {
  std::vector<Cell> path;
  int phase = 0;

  std::size_t period() const { return path.size() <= 1 ? 1 : 2 * (path.size() - 1); }
  Cell at(std::size_t t) const;
};

struct Layout {
  std::vector<std::string> walls;  // kRows strings, '#' for wall
  Cell start;
  std::vector<Cell> food;
  std::vector<Cell> poison;
  std::vector<Block> blocks;

  bool is_wall(Cell c) const;
};

/// Layout file: optional "phase <block> <offset>" header lines and '#'
/// comments, a line "grid", then kRows rows of kCols characters.
/// Throws ConfigError on malformed input.
Layout parse_layout(const std::string& text);
Layout load_layout(const std::string& path);
/// Layout shipped in data/grid_reference.txt, compiled in.
Layout reference_layout();

struct GridState {
  Cell agent;
  std::uint64_t items = 0;  // bit i set: item i (food then poison) still present
  std::size_t t = 0;        // step counter
};

class GridEnv : public Environment {
 public:
  explicit GridEnv(Layout layout);

  std::string name() const override { return "grid"; }
  const Alphabet& alphabet() const override { return alphabet_; }
  StateId reset() override;
  StepResult step(std::uint32_t action) override;
  StateId state() const override;
  bool done() const override { return done_; }
  bool is_legal(std::uint32_t action) const override { return action < 4; }
  std::size_t step_limit() const override { return kStepLimit; }
  std::size_t steps() const override { return state_.t; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<GridEnv>(*this); }

  const GridState& grid_state() const { return state_; }
  const Layout& layout() const { return layout_; }
  std::vector<Cell> block_positions(std::size_t t) const;

 private:
  Layout layout_;
  Alphabet alphabet_;
  std::size_t cycle_ = 1;  // lcm of block periods
  GridState state_;
  bool done_ = false;
};

}  // namespace actgram::grid
