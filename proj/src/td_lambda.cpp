#include "actgram/td_lambda.hpp"

#include <stdexcept>

namespace actgram {

namespace {
constexpr double kTraceFloor = 1e-12;
}

TdLambdaAgent::TdLambdaAgent(std::size_t num_actions, AgentConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  for (std::size_t a = 0; a < num_actions; ++a) actions_.push_back(static_cast<ActionId>(a));
}

ActionId TdLambdaAgent::choose(const Environment& env, Rng& rng) const {
  if (!cfg_.mask_illegal) return epsilon_greedy(q_, env.state(), actions_, cfg_.epsilon, rng);
  std::vector<ActionId> legal;
  for (ActionId a : actions_) {
    if (env.is_legal(a)) legal.push_back(a);
  }
  return epsilon_greedy(q_, env.state(), legal.empty() ? actions_ : legal, cfg_.epsilon, rng);
}

void TdLambdaAgent::begin_episode(const Environment& env, Rng& rng) {
  traces_.clear();
  pending_ = choose(env, rng);
}

StepResult TdLambdaAgent::step(Environment& env, Rng& rng) {
  if (env.done()) throw std::logic_error("td_lambda: episode already finished");
  StateId s = env.state();
  ActionId a = pending_;
  StepResult r = env.step(a);

  double target = r.reward;
  if (!r.terminal) target += cfg_.gamma * q_.max_over(r.next, actions_);
  double delta = target - q_.get(s, a);
  traces_[{s, a}] += 1.0;

  double decay = cfg_.gamma * cfg_.lambda;
  for (auto it = traces_.begin(); it != traces_.end();) {
    q_.at(it->first.s, it->first.a) += cfg_.alpha * delta * it->second;
    it->second *= decay;
    if (it->second < kTraceFloor) {
      it = traces_.erase(it);
    } else {
      ++it;
    }
  }
  if (r.done) return r;

  pending_ = choose(env, rng);
  if (q_.get(r.next, pending_) != q_.max_over(r.next, actions_)) traces_.clear();
  return r;
}

}  // namespace actgram
