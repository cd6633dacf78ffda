#include "actgram/hanoi.hpp"

#include "actgram/errors.hpp"

namespace actgram::hanoi {

StateId HanoiState::id() const {
  StateId id = 0;
  for (auto it = pegs.rbegin(); it != pegs.rend(); ++it) id = id * 3 + *it;
  return id;
}

bool HanoiState::is_goal() const {
  for (auto p : pegs) {
    if (p != 2) return false;
  }
  return true;
}

int HanoiState::top(int peg) const {
  for (int d = 0; d < disks(); ++d) {
    if (pegs[static_cast<std::size_t>(d)] == peg) return d;
  }
  return -1;
}

HanoiState hanoi_reset(int n) {
  if (n < kMinDisks || n > kMaxDisks) {
    throw ConfigError("disks: must be in [" + std::to_string(kMinDisks) + ", " + std::to_string(kMaxDisks) +
                      "] (got " + std::to_string(n) + ")");
  }
  return HanoiState{std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
}

HanoiState state_from_id(StateId id, int n) {
  HanoiState s = hanoi_reset(n);
  for (auto& p : s.pegs) {
    p = static_cast<std::uint8_t>(id % 3);
    id /= 3;
  }
  return s;
}

std::size_t state_count(int n) {
  std::size_t c = 1;
  for (int i = 0; i < n; ++i) c *= 3;
  return c;
}

bool is_legal(const HanoiState& s, std::uint32_t action) {
  if (action >= kMoves.size()) return false;
  auto [from, to] = kMoves[action];
  int moving = s.top(from);
  if (moving < 0) return false;
  int target = s.top(to);
  return target < 0 || moving < target;
}

HanoiOutcome hanoi_step(const HanoiState& s, std::uint32_t action) {
  HanoiOutcome out{s, 0.0, false, false};
  if (!is_legal(s, action)) {
    out.illegal = true;
    return out;
  }
  auto [from, to] = kMoves[action];
  out.next.pegs[static_cast<std::size_t>(s.top(from))] = static_cast<std::uint8_t>(to);
  if (out.next.is_goal()) {
    out.reward = kGoalReward;
    out.done = true;
  }
  return out;
}

namespace {

std::uint32_t action_for(int from, int to) {
  for (std::uint32_t a = 0; a < kMoves.size(); ++a) {
    if (kMoves[a].first == from && kMoves[a].second == to) return a;
  }
  return 0;
}

void solve(int n, int from, int to, int aux, SymbolString& out) {
  if (n == 0) return;
  solve(n - 1, from, aux, to, out);
  out.push_back(Symbol::terminal(action_for(from, to)));
  solve(n - 1, aux, to, from, out);
}

}  // namespace

Trace hanoi_optimal_trace(int n) {
  hanoi_reset(n);
  SymbolString moves;
  solve(n, 0, 2, 1, moves);
  return Trace(std::move(moves), TraceMeta{0, 0, true});
}

Alphabet alphabet() { return Alphabet::letters(kMoves.size()); }

HanoiEnv::HanoiEnv(int disks)
    : disks_(disks),
      alphabet_(hanoi::alphabet()),
      state_(hanoi_reset(disks)),
      limit_(10 * ((std::size_t{1} << disks) - 1)) {}

std::string HanoiEnv::name() const { return "hanoi:" + std::to_string(disks_); }

StateId HanoiEnv::reset() {
  state_ = hanoi_reset(disks_);
  steps_ = 0;
  done_ = false;
  return state_.id();
}

StepResult HanoiEnv::step(std::uint32_t action) {
  if (done_) throw std::logic_error("hanoi: step after episode end");
  HanoiOutcome o = hanoi_step(state_, action);
  state_ = std::move(o.next);
  ++steps_;
  StepResult r;
  r.next = state_.id();
  r.reward = o.reward;
  r.illegal = o.illegal;
  r.terminal = o.done;
  r.success = o.done;
  r.done = o.done || steps_ >= limit_;
  done_ = r.done;
  return r;
}

bool HanoiEnv::is_legal(std::uint32_t action) const { return hanoi::is_legal(state_, action); }

}  // namespace actgram::hanoi
