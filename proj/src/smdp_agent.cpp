#include "actgram/smdp_agent.hpp"

#include <cmath>
#include <stdexcept>

#include "actgram/errors.hpp"

namespace actgram {

void AgentConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("agent.alpha must be in (0, 1]");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("agent.gamma must be in (0, 1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("agent.epsilon must be in [0, 1]");
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ConfigError("agent.lambda must be in [0, 1)");
}

MacroExecutionRecord execute_macro(Environment& env, ActionId id, std::span<const std::uint32_t> actions,
                                   double gamma) {
  if (env.done()) throw std::logic_error("execute_macro: episode already finished");
  if (actions.empty()) throw std::logic_error("execute_macro: empty macro");
  MacroExecutionRecord rec;
  rec.s = env.state();
  rec.action = id;
  double discount = 1.0;
  for (std::uint32_t a : actions) {
    StateId before = env.state();
    StepResult r = env.step(a);
    rec.steps.push_back({before, a, r.reward, r.next, r.terminal, r.illegal});
    rec.reward += discount * r.reward;
    discount *= gamma;
    rec.next = r.next;
    if (r.done) {
      rec.done = true;
      rec.terminal = r.terminal;
      rec.success = r.success;
      break;
    }
  }
  rec.duration = rec.steps.size();
  return rec;
}

double q_update(QTable& q, StateId s, ActionId a, double reward, StateId next, std::size_t tau, bool terminal,
                std::span<const ActionId> active, const AgentConfig& cfg) {
  double target = reward;
  if (!terminal) target += std::pow(cfg.gamma, static_cast<double>(tau)) * q.max_over(next, active);
  double& v = q.at(s, a);
  v += cfg.alpha * (target - v);
  return v;
}

double smdp_q_update(QTable& q, const MacroExecutionRecord& rec, std::span<const ActionId> active,
                     const AgentConfig& cfg) {
  return q_update(q, rec.s, rec.action, rec.reward, rec.next, rec.duration, rec.terminal, active, cfg);
}

std::size_t intra_macro_updates(QTable& q, const MacroExecutionRecord& rec, std::span<const ActionId> active,
                                const AgentConfig& cfg) {
  smdp_q_update(q, rec, active, cfg);
  bool primitive = rec.duration == 1 && rec.steps.front().action == rec.action;
  if (primitive) return 1;
  for (const PrimitiveStep& st : rec.steps) {
    q_update(q, st.s, st.action, st.reward, st.next, 1, st.terminal, active, cfg);
  }
  return 1 + rec.steps.size();
}

ActionId epsilon_greedy(const QTable& q, StateId s, std::span<const ActionId> active, double epsilon, Rng& rng) {
  if (active.empty()) throw std::logic_error("epsilon_greedy: empty action set");
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, active.size() - 1);
    return active[pick(rng)];
  }
  double best = -std::numeric_limits<double>::infinity();
  std::vector<ActionId> ties;
  for (ActionId a : active) {
    double v = q.get(s, a);
    if (v > best) {
      best = v;
      ties.assign(1, a);
    } else if (v == best) {
      ties.push_back(a);
    }
  }
  if (ties.size() == 1) return ties.front();
  std::uniform_int_distribution<std::size_t> pick(0, ties.size() - 1);
  return ties[pick(rng)];
}

SmdpAgent::SmdpAgent(std::size_t num_primitives, AgentConfig cfg) : num_primitives_(num_primitives), cfg_(cfg) {
  cfg_.validate();
  for (std::size_t a = 0; a < num_primitives_; ++a) active_.push_back(static_cast<ActionId>(a));
}

ActionId SmdpAgent::register_macro(const ActionSequence& actions) {
  if (actions.size() < 2) throw std::invalid_argument("register_macro: macro needs at least 2 actions");
  for (std::uint32_t a : actions) {
    if (a >= num_primitives_) throw ConfigError("macro uses primitive " + std::to_string(a) + " outside the action set");
  }
  for (std::size_t i = 0; i < registry_.size(); ++i) {
    if (registry_[i] == actions) return static_cast<ActionId>(num_primitives_ + i);
  }
  registry_.push_back(actions);
  return static_cast<ActionId>(num_primitives_ + registry_.size() - 1);
}

std::vector<ActionId> SmdpAgent::set_active_macros(std::span<const MacroAction> macros) {
  ActionSet set = augment_action_space(num_primitives_, macros);
  active_.resize(num_primitives_);
  std::vector<ActionId> ids;
  for (const MacroAction& m : set.macros) {
    ActionId id = register_macro(m.actions);
    active_.push_back(id);
    ids.push_back(id);
  }
  return ids;
}

std::vector<MacroAction> SmdpAgent::active_macros() const {
  std::vector<MacroAction> out;
  for (std::size_t i = num_primitives_; i < active_.size(); ++i) {
    MacroAction m;
    m.id = active_[i];
    m.actions = content(active_[i]);
    out.push_back(m);
  }
  return out;
}

ActionSequence SmdpAgent::content(ActionId id) const {
  if (id < num_primitives_) return {id};
  std::size_t i = id - num_primitives_;
  if (i >= registry_.size()) throw std::out_of_range("unknown action id " + std::to_string(id));
  return registry_[i];
}

std::vector<ActionId> SmdpAgent::selectable(const Environment& env) const {
  if (!cfg_.mask_illegal) return active_;
  std::vector<ActionId> out;
  for (ActionId a : active_) {
    std::uint32_t first = a < num_primitives_ ? a : registry_[a - num_primitives_].front();
    if (env.is_legal(first)) out.push_back(a);
  }
  return out.empty() ? active_ : out;
}

ActionId SmdpAgent::select(const Environment& env, double epsilon, Rng& rng) const {
  if (!cfg_.mask_illegal) return epsilon_greedy(q_, env.state(), active_, epsilon, rng);
  auto cand = selectable(env);
  return epsilon_greedy(q_, env.state(), cand, epsilon, rng);
}

MacroExecutionRecord SmdpAgent::act(Environment& env, ActionId id) const {
  if (id < num_primitives_) {
    std::uint32_t a = id;
    return execute_macro(env, id, std::span<const std::uint32_t>(&a, 1), cfg_.gamma);
  }
  return execute_macro(env, id, registry_.at(id - num_primitives_), cfg_.gamma);
}

std::size_t SmdpAgent::learn(const MacroExecutionRecord& rec, bool intra_macro) {
  if (intra_macro) return intra_macro_updates(q_, rec, active_, cfg_);
  smdp_q_update(q_, rec, active_, cfg_);
  return 1;
}

nlohmann::json to_json(const AgentConfig& cfg) {
  return {{"alpha", cfg.alpha},
          {"gamma", cfg.gamma},
          {"epsilon", cfg.epsilon},
          {"lambda", cfg.lambda},
          {"mask_illegal", cfg.mask_illegal}};
}

AgentConfig agent_config_from_json(const nlohmann::json& j) {
  AgentConfig cfg;
  if (!j.is_object()) throw ConfigError("agent: expected an object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "alpha") cfg.alpha = v.get<double>();
      else if (key == "gamma") cfg.gamma = v.get<double>();
      else if (key == "epsilon") cfg.epsilon = v.get<double>();
      else if (key == "lambda") cfg.lambda = v.get<double>();
      else if (key == "mask_illegal") cfg.mask_illegal = v.get<bool>();
      else throw ConfigError("agent." + key + ": unknown field");
    } catch (const nlohmann::json::exception&) {
      throw ConfigError("agent." + key + ": wrong type");
    }
  }
  cfg.validate();
  return cfg;
}

nlohmann::json SmdpAgent::to_json() const {
  nlohmann::json macros = nlohmann::json::array();
  for (const auto& m : registry_) macros.push_back(m);
  return {{"config", actgram::to_json(cfg_)},
          {"num_primitives", num_primitives_},
          {"macros", macros},
          {"active", active_},
          {"q", q_.to_json()}};
}

SmdpAgent SmdpAgent::from_json(const nlohmann::json& j) {
  try {
    SmdpAgent agent(j.at("num_primitives").get<std::size_t>(), agent_config_from_json(j.at("config")));
    for (const auto& m : j.at("macros")) agent.register_macro(m.get<ActionSequence>());
    agent.active_ = j.at("active").get<std::vector<ActionId>>();
    for (ActionId a : agent.active_) agent.content(a);
    agent.q_ = QTable::from_json(j.at("q"));
    return agent;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  } catch (const std::out_of_range& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace actgram
