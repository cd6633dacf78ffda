#include "actgram/replay_buffer.hpp"

#include <algorithm>

#include "actgram/errors.hpp"
#include "json.hpp"

namespace actgram {

GrammarReplayBuffer::GrammarReplayBuffer(std::size_t num_primitives, std::size_t capacity)
    : num_primitives_(num_primitives), capacity_(capacity) {
  if (capacity_ == 0) throw ConfigError("replay capacity must be positive");
}

void GrammarReplayBuffer::push(const Transition& t) {
  if (order_.size() == capacity_) {
    ActionId old = order_.front();
    order_.pop_front();
    auto& q = by_action_[old];
    q.pop_front();
    if (q.empty()) by_action_.erase(old);
  }
  Transition stored = t;
  stored.active = is_active(t.action);
  order_.push_back(t.action);
  by_action_[t.action].push_back(stored);
}

void GrammarReplayBuffer::push(const MacroExecutionRecord& rec) {
  push(Transition{rec.s, rec.action, rec.reward, rec.next, rec.duration, rec.terminal, true});
  if (rec.action < num_primitives_) return;
  for (const PrimitiveStep& st : rec.steps) push(Transition{st.s, st.action, st.reward, st.next, 1, st.terminal, true});
}

void GrammarReplayBuffer::set_active(std::span<const ActionId> macro_ids) {
  active_macros_.clear();
  for (ActionId id : macro_ids) {
    if (id >= num_primitives_) active_macros_.push_back(id);
  }
  std::sort(active_macros_.begin(), active_macros_.end());
  active_macros_.erase(std::unique(active_macros_.begin(), active_macros_.end()), active_macros_.end());
}

bool GrammarReplayBuffer::is_active(ActionId id) const {
  return id < num_primitives_ || std::binary_search(active_macros_.begin(), active_macros_.end(), id);
}

std::size_t GrammarReplayBuffer::active_size() const {
  std::size_t n = 0;
  for (const auto& [id, q] : by_action_) {
    if (is_active(id)) n += q.size();
  }
  return n;
}

std::vector<Transition> GrammarReplayBuffer::sample(std::size_t n, Rng& rng) const {
  std::vector<const std::deque<Transition>*> pools;
  std::vector<std::size_t> ends;
  std::size_t total = 0;
  for (const auto& [id, q] : by_action_) {
    if (!is_active(id)) continue;
    total += q.size();
    pools.push_back(&q);
    ends.push_back(total);
  }
  if (total == 0) throw EmptyBufferError("replay buffer holds no active transitions");
  std::uniform_int_distribution<std::size_t> pick(0, total - 1);
  std::vector<Transition> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = pick(rng);
    std::size_t p = static_cast<std::size_t>(std::upper_bound(ends.begin(), ends.end(), r) - ends.begin());
    std::size_t offset = r - (p == 0 ? 0 : ends[p - 1]);
    Transition t = (*pools[p])[offset];
    t.active = true;
    out.push_back(t);
  }
  return out;
}

void GrammarReplayBuffer::dump_ndjson(std::ostream& out) const {
  std::map<ActionId, std::size_t> cursor;
  for (ActionId id : order_) {
    const Transition& t = by_action_.at(id)[cursor[id]++];
    nlohmann::json j = {{"s", t.s},         {"action", t.action},     {"reward", t.reward},
                        {"next", t.next},   {"duration", t.duration}, {"terminal", t.terminal},
                        {"active", is_active(id)}};
    out << j.dump() << '\n';
  }
}

}  // namespace actgram
