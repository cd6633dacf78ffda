#include "actgram/gridworld.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "actgram/errors.hpp"
#include "actgram/hanoi.hpp"

namespace actgram::grid {

namespace {

constexpr const char* kReference =
    "phase 0 0\n"
    "phase 1 1\n"
    "grid\n"
    "####################\n"
    "#A..F....P....F....#\n"
    "#......00000.......#\n"
    "######.######.######\n"
    "#.F..P....F...P..F.#\n"
    "#...........1......#\n"
    "#..P...F....1.P....#\n"
    "###########.1#######\n"
    "#.F...P...F.....F..#\n"
    "####################\n";

constexpr std::size_t kMaxItems = 40;

}  // namespace

Cell Block::at(std::size_t t) const {
  std::size_t p = period();
  std::size_t i = (t + static_cast<std::size_t>(phase)) % p;
  if (i >= path.size()) i = p - i;
  return path[i];
}

bool Layout::is_wall(Cell c) const {
  if (c.row < 0 || c.row >= kRows || c.col < 0 || c.col >= kCols) return true;
  return walls[static_cast<std::size_t>(c.row)][static_cast<std::size_t>(c.col)] == '#';
}

Layout parse_layout(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::map<int, int> phases;
  bool in_grid = false;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!in_grid) {
      if (line.empty() || line[0] == '#') {
        // Comments are only allowed before the grid; grid rows start with '#'.
        if (line.rfind("# ", 0) == 0 || line == "#" || line.empty()) continue;
      }
      std::istringstream ls(line);
      std::string word;
      ls >> word;
      if (word == "grid") {
        in_grid = true;
      } else if (word == "phase") {
        int block = -1;
        int offset = 0;
        if (!(ls >> block >> offset) || block < 0 || block > 9 || offset < 0) {
          throw ConfigError("layout: bad phase line '" + line + "'");
        }
        phases[block] = offset;
      } else {
        throw ConfigError("layout: unknown header line '" + line + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.size() != static_cast<std::size_t>(kRows)) {
    throw ConfigError("layout: expected " + std::to_string(kRows) + " grid rows, got " + std::to_string(rows.size()));
  }
  Layout layout;
  std::map<int, std::vector<Cell>> paths;
  int starts = 0;
  for (int r = 0; r < kRows; ++r) {
    const std::string& row = rows[static_cast<std::size_t>(r)];
    if (row.size() != static_cast<std::size_t>(kCols)) {
      throw ConfigError("layout: row " + std::to_string(r) + " must have " + std::to_string(kCols) + " columns");
    }
    std::string walls(kCols, '.');
    for (int c = 0; c < kCols; ++c) {
      char ch = row[static_cast<std::size_t>(c)];
      Cell cell{r, c};
      switch (ch) {
        case '#': walls[static_cast<std::size_t>(c)] = '#'; break;
        case '.': break;
        case 'A': layout.start = cell; ++starts; break;
        case 'F': layout.food.push_back(cell); break;
        case 'P': layout.poison.push_back(cell); break;
        default:
          if (ch >= '0' && ch <= '9') {
            paths[ch - '0'].push_back(cell);
          } else {
            throw ConfigError(std::string("layout: unknown cell character '") + ch + "'");
          }
      }
    }
    layout.walls.push_back(walls);
  }
  if (starts != 1) throw ConfigError("layout: exactly one agent start 'A' required");
  if (layout.food.empty()) throw ConfigError("layout: at least one food item required");
  if (layout.food.size() + layout.poison.size() > kMaxItems) throw ConfigError("layout: too many items");
  for (auto& [id, cells] : paths) {
    // Cells are collected in row-major order, which is path order for a straight segment.
    bool horizontal = std::all_of(cells.begin(), cells.end(), [&](Cell c) { return c.row == cells[0].row; });
    bool vertical = std::all_of(cells.begin(), cells.end(), [&](Cell c) { return c.col == cells[0].col; });
    if (!horizontal && !vertical) throw ConfigError("layout: block " + std::to_string(id) + " path is not straight");
    for (std::size_t i = 1; i < cells.size(); ++i) {
      int gap = std::abs(cells[i].row - cells[i - 1].row) + std::abs(cells[i].col - cells[i - 1].col);
      if (gap != 1) throw ConfigError("layout: block " + std::to_string(id) + " path is not contiguous");
    }
    Block b;
    b.path = cells;
    if (auto it = phases.find(id); it != phases.end()) b.phase = it->second;
    layout.blocks.push_back(b);
  }
  for (const auto& [id, off] : phases) {
    if (!paths.contains(id)) throw ConfigError("layout: phase given for missing block " + std::to_string(id));
  }
  for (const Block& b : layout.blocks) {
    if (b.at(0) == layout.start) throw ConfigError("layout: agent start collides with a block");
  }
  return layout;
}

Layout load_layout(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("layout: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_layout(ss.str());
}

Layout reference_layout() { return parse_layout(kReference); }

GridEnv::GridEnv(Layout layout)
    : layout_(std::move(layout)), alphabet_(std::vector<std::string>{"u", "d", "l", "r"}) {
  for (const Block& b : layout_.blocks) cycle_ = std::lcm(cycle_, b.period());
  reset();
}

StateId GridEnv::reset() {
  state_.agent = layout_.start;
  std::size_t n = layout_.food.size() + layout_.poison.size();
  state_.items = n == 64 ? ~0ull : ((1ull << n) - 1);
  state_.t = 0;
  done_ = false;
  return state();
}

StateId GridEnv::state() const {
  StateId pos = static_cast<StateId>(state_.agent.row * kCols + state_.agent.col);
  StateId phase = state_.t % cycle_;
  return (state_.items * cycle_ + phase) * static_cast<StateId>(kRows * kCols) + pos;
}

std::vector<Cell> GridEnv::block_positions(std::size_t t) const {
  std::vector<Cell> out;
  for (const Block& b : layout_.blocks) out.push_back(b.at(t));
  return out;
}

StepResult GridEnv::step(std::uint32_t action) {
  if (done_) throw std::logic_error("grid: step after episode end");
  if (action >= 4) throw std::out_of_range("grid: action out of range");
  static constexpr int kDr[4] = {-1, 1, 0, 0};
  static constexpr int kDc[4] = {0, 0, -1, 1};
  Cell from = state_.agent;
  Cell to{from.row + kDr[action], from.col + kDc[action]};
  StepResult r;
  if (layout_.is_wall(to)) to = from;
  state_.agent = to;

  std::size_t nfood = layout_.food.size();
  for (std::size_t i = 0; i < nfood + layout_.poison.size(); ++i) {
    if (!(state_.items >> i & 1ull)) continue;
    Cell item = i < nfood ? layout_.food[i] : layout_.poison[i - nfood];
    if (item == to) {
      state_.items &= ~(1ull << i);
      r.reward += i < nfood ? kFoodReward : kPoisonReward;
    }
  }

  auto before = block_positions(state_.t);
  ++state_.t;
  auto after = block_positions(state_.t);
  bool collision = false;
  for (std::size_t b = 0; b < after.size(); ++b) {
    if (after[b] == to || (before[b] == to && after[b] == from)) collision = true;
  }
  bool food_left = (state_.items & ((nfood == 64 ? ~0ull : (1ull << nfood) - 1))) != 0;
  if (collision) {
    r.reward += kCollisionReward;
    r.terminal = true;
  } else if (!food_left) {
    r.reward += kCompletionBonus;
    r.terminal = true;
    r.success = true;
  }
  r.done = r.terminal || state_.t >= kStepLimit;
  r.next = state();
  done_ = r.done;
  return r;
}

}  // namespace actgram::grid

namespace actgram {

std::unique_ptr<Environment> make_environment(const std::string& spec) {
  auto colon = spec.find(':');
  std::string kind = spec.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "hanoi") {
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(arg, &used);
      if (used != arg.size()) throw std::invalid_argument(arg);
    } catch (const std::exception&) {
      throw ConfigError("env: bad disk count in '" + spec + "'");
    }
    return std::make_unique<hanoi::HanoiEnv>(n);
  }
  if (kind == "grid") {
    if (arg.empty() || arg == "reference") return std::make_unique<grid::GridEnv>(grid::reference_layout());
    return std::make_unique<grid::GridEnv>(grid::load_layout(arg));
  }
  throw ConfigError("env: expected hanoi:N or grid:LAYOUT, got '" + spec + "'");
}

}  // namespace actgram
