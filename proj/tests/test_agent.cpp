#include <cmath>
#include <map>
#include <random>

#include "actgram/errors.hpp"
#include "actgram/experiment.hpp"
#include "actgram/hanoi.hpp"
#include "actgram/smdp_agent.hpp"
#include "actgram/td_lambda.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace actgram;

namespace {

std::vector<std::uint32_t> moves(std::string_view text) {
  std::vector<std::uint32_t> out;
  for (Symbol s : hanoi::alphabet().parse(text)) out.push_back(s.index());
  return out;
}

std::vector<ActionId> ids(std::size_t n) {
  std::vector<ActionId> out;
  for (std::size_t a = 0; a < n; ++a) out.push_back(static_cast<ActionId>(a));
  return out;
}

// Plain one-step Q-learning on a std::map, same rng draw protocol.
struct ReferenceQ {
  double alpha, gamma, epsilon;
  std::size_t n;
  std::map<std::pair<StateId, ActionId>, double> q;

  double get(StateId s, ActionId a) const {
    auto it = q.find({s, a});
    return it == q.end() ? 0.0 : it->second;
  }
  double best(StateId s) const {
    double m = get(s, 0);
    for (ActionId a = 1; a < n; ++a) m = std::max(m, get(s, a));
    return m;
  }
  ActionId choose(StateId s, Rng& rng) const {
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
      return static_cast<ActionId>(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    }
    double m = best(s);
    std::vector<ActionId> tied;
    for (ActionId a = 0; a < n; ++a)
      if (get(s, a) == m) tied.push_back(a);
    if (tied.size() == 1) return tied[0];
    return tied[std::uniform_int_distribution<std::size_t>(0, tied.size() - 1)(rng)];
  }
  void update(StateId s, ActionId a, double r, StateId s2, bool terminal) {
    double target = terminal ? r : r + gamma * best(s2);
    double& v = q[{s, a}];
    v = v + alpha * (target - v);
  }
};

bool same_as_reference(const QTable& t, const ReferenceQ& ref) {
  for (auto& [key, v] : ref.q) {
    if (t.get(key.first, key.second) != v) return false;
  }
  for (auto& [s, row] : t.rows()) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (row[a] != ref.get(s, static_cast<ActionId>(a))) return false;
    }
  }
  return true;
}

void train_smdp(SmdpAgent& agent, Environment& env, int episodes, Rng& rng) {
  for (int e = 0; e < episodes; ++e) {
    env.reset();
    while (!env.done()) {
      ActionId a = agent.select(env, agent.config().epsilon, rng);
      agent.learn(agent.act(env, a), true);
    }
  }
}

long greedy_td(const Environment& proto, const TdLambdaAgent& agent) {
  auto env = proto.clone();
  env->reset();
  Rng rng(1);
  while (!env->done()) {
    StepResult r = env->step(epsilon_greedy(agent.q(), env->state(), agent.active(), 0.0, rng));
    if (r.success) return static_cast<long>(env->steps());
  }
  return -1;
}

}  // namespace

TEST_CASE("smdp update examples") {
  AgentConfig cfg;
  auto active = ids(6);
  QTable q;
  SUBCASE("terminal macro with reward 100") {
    double v = q_update(q, 7, 6, 100.0, 8, 2, true, active, cfg);
    CHECK(v == doctest::Approx(80.0).epsilon(1e-15));
    CHECK(q.get(7, 6) == v);
    CHECK(q.get(8, 0) == 0.0);
  }
  SUBCASE("zero reward on a zero table is a fixed point") {
    q_update(q, 1, 2, 0.0, 3, 4, false, active, cfg);
    CHECK(q.get(1, 2) == 0.0);
  }
  SUBCASE("only the updated entry changes") {
    q.set(3, 1, 10.0);
    q.set(3, 2, 20.0);
    q.set(1, 0, 5.0);
    q_update(q, 1, 0, 1.0, 3, 2, false, active, cfg);
    double expected = 5.0 + 0.8 * (1.0 + 0.95 * 0.95 * 20.0 - 5.0);
    CHECK(q.get(1, 0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(q.get(3, 1) == 10.0);
    CHECK(q.get(3, 2) == 20.0);
  }
  SUBCASE("bootstrap ignores inactive actions") {
    q.set(3, 9, 1000.0);
    q.set(3, 1, 10.0);
    q_update(q, 1, 0, 0.0, 3, 1, false, active, cfg);
    CHECK(q.get(1, 0) == doctest::Approx(0.8 * 0.95 * 10.0));
  }
}

TEST_CASE("property: a duration-1 update equals the one-step formula") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50, 150);
  AgentConfig cfg;
  auto active = ids(6);
  for (int i = 0; i < 500; ++i) {
    QTable q;
    for (ActionId a = 0; a < 6; ++a) q.set(2, a, u(rng));
    double old = u(rng);
    q.set(1, 3, old);
    double r = u(rng);
    double m = q.max_over(2, active);
    double expected = (1 - cfg.alpha) * old + cfg.alpha * (r + cfg.gamma * m);
    double got = q_update(q, 1, 3, r, 2, 1, false, active, cfg);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("execute_macro: full run, truncation and finished episodes") {
  hanoi::HanoiEnv env(5);
  env.reset();
  env.step(moves("a")[0]);  // disk 0 to peg 1
  MacroExecutionRecord rec = execute_macro(env, 6, moves("bc"), 0.95);
  CHECK(rec.duration == 2);
  CHECK(rec.steps.size() == 2);
  CHECK_FALSE(rec.steps[0].illegal);
  CHECK_FALSE(rec.steps[1].illegal);
  CHECK(rec.next == env.state());
  CHECK_FALSE(rec.done);

  // Three moves short of the goal.
  hanoi::HanoiEnv near(5);
  near.reset();
  Trace opt = hanoi::hanoi_optimal_trace(5);
  for (std::size_t i = 0; i < 28; ++i) near.step(opt.symbols()[i].index());
  MacroExecutionRecord t = execute_macro(near, 7, moves("cdbcdb"), 0.95);
  CHECK(t.duration == 3);
  CHECK(t.terminal);
  CHECK(t.done);
  CHECK(t.success);
  CHECK(t.reward == doctest::Approx(0.95 * 0.95 * 100.0).epsilon(1e-14));

  // Three steps short of the step limit: truncated, not terminal.
  hanoi::HanoiEnv limit(5);
  limit.reset();
  while (limit.steps() + 3 < limit.step_limit()) limit.step(moves("c")[0]);
  auto macro = moves("bafbcd");
  MacroExecutionRecord cut = execute_macro(limit, 8, macro, 0.95);
  CHECK(cut.duration == 3);
  CHECK(cut.done);
  CHECK_FALSE(cut.terminal);
  CHECK(cut.reward == 0.0);
  CHECK_THROWS_AS(execute_macro(near, 7, macro, 0.95), std::logic_error);
  CHECK_THROWS_AS(execute_macro(limit, 8, macro, 0.95), std::logic_error);
  CHECK_THROWS_AS(execute_macro(env, 7, std::span<const std::uint32_t>{}, 0.95), std::logic_error);
}

TEST_CASE("intra-macro update counts") {
  AgentConfig cfg;
  SmdpAgent agent(6, cfg);
  hanoi::HanoiEnv env(5);
  env.reset();
  ActionId m = agent.register_macro(moves("bafbcd"));
  std::vector<MacroAction> set{MacroAction{0, moves("bafbcd"), {}}};
  agent.set_active_macros(set);
  MacroExecutionRecord rec = agent.act(env, m);
  CHECK(rec.duration == 6);
  CHECK(agent.learn(rec, true) == 7);
  for (auto& [s, row] : agent.q().rows()) {
    for (double v : row) CHECK(v == 0.0);
  }

  MacroExecutionRecord prim = agent.act(env, 1);
  QTable a = agent.q();
  CHECK(intra_macro_updates(a, prim, agent.active(), cfg) == 1);
  QTable b = agent.q();
  smdp_q_update(b, prim, agent.active(), cfg);
  CHECK(a.same_values(b));
  CHECK(agent.learn(rec, false) == 1);
}

TEST_CASE("intra-macro updates apply in temporal order after the macro update") {
  AgentConfig cfg;
  hanoi::HanoiEnv env(2);
  env.reset();
  auto macro = moves("abd");
  MacroExecutionRecord rec = execute_macro(env, 6, macro, cfg.gamma);
  REQUIRE(rec.success);
  QTable q;
  std::vector<ActionId> active{0, 1, 2, 3, 4, 5, 6};
  intra_macro_updates(q, rec, active, cfg);
  // Oracle: the same sequence of updates by hand.
  std::map<std::pair<StateId, ActionId>, double> ref;
  auto max_at = [&](StateId s) {
    double m = 0.0;
    bool any = false;
    for (ActionId a : active) {
      double v = ref.contains({s, a}) ? ref[{s, a}] : 0.0;
      m = any ? std::max(m, v) : v;
      any = true;
    }
    return m;
  };
  auto upd = [&](StateId s, ActionId a, double r, StateId n, int tau, bool term) {
    double target = r + (term ? 0.0 : std::pow(cfg.gamma, tau) * max_at(n));
    double& v = ref[{s, a}];
    v = v + cfg.alpha * (target - v);
  };
  upd(rec.s, 6, rec.reward, rec.next, static_cast<int>(rec.duration), rec.terminal);
  for (auto& st : rec.steps) upd(st.s, st.action, st.reward, st.next, 1, st.terminal);
  for (auto& [k, v] : ref) CHECK(q.get(k.first, k.second) == v);
}

TEST_CASE("epsilon-greedy contracts") {
  QTable q;
  auto active = ids(6);
  q.set(0, 4, 3.0);
  q.set(0, 2, 1.0);
  Rng rng(9);
  for (int i = 0; i < 100; ++i) CHECK(epsilon_greedy(q, 0, active, 0.0, rng) == 4);

  std::vector<std::size_t> counts(6, 0);
  for (int i = 0; i < 100000; ++i) counts[epsilon_greedy(q, 0, active, 1.0, rng)] += 1;
  CHECK(oracle::chi_square_uniform(counts) < oracle::chi_square_crit_01(5));

  // ties split uniformly
  std::vector<std::size_t> tie(6, 0);
  for (int i = 0; i < 60000; ++i) tie[epsilon_greedy(q, 7, active, 0.0, rng)] += 1;
  CHECK(oracle::chi_square_uniform(tie) < oracle::chi_square_crit_01(5));

  CHECK_THROWS_AS(epsilon_greedy(q, 0, std::span<const ActionId>{}, 0.0, rng), std::logic_error);
}

TEST_CASE("inactive macros are never selected") {
  SmdpAgent agent(6, AgentConfig{});
  std::vector<MacroAction> two{MacroAction{0, {0, 1}, {}}, MacroAction{1, {2, 3}, {}}};
  auto first = agent.set_active_macros(two);
  std::vector<MacroAction> one{MacroAction{0, {2, 3}, {}}};
  auto second = agent.set_active_macros(one);
  CHECK(second[0] == first[1]);  // same content keeps its id
  ActionId off = first[0];
  hanoi::HanoiEnv env(3);
  agent.q().set(env.state(), off, 1e6);
  Rng rng(2);
  for (double eps : {0.0, 0.5, 1.0}) {
    for (int i = 0; i < 20000; ++i) CHECK(agent.select(env, eps, rng) != off);
  }
}

TEST_CASE("register_macro validation and masking") {
  SmdpAgent agent(6, AgentConfig{});
  CHECK_THROWS_AS(agent.register_macro({1}), std::invalid_argument);
  CHECK_THROWS_AS(agent.register_macro({1, 9}), ConfigError);
  CHECK(agent.register_macro({1, 2}) == 6);
  CHECK(agent.register_macro({1, 2}) == 6);
  CHECK(agent.register_macro({2, 1}) == 7);

  AgentConfig masked;
  masked.mask_illegal = true;
  SmdpAgent m(6, masked);
  std::vector<MacroAction> set{MacroAction{0, {2, 3}, {}}, MacroAction{1, {1, 0}, {}}};
  m.set_active_macros(set);
  hanoi::HanoiEnv env(3);
  auto sel = m.selectable(env);
  // From the start only moves off peg 0 (a, b) are legal.
  CHECK(sel == std::vector<ActionId>{0, 1, 7});
}

TEST_CASE("agent config validation names the field") {
  auto msg = [](AgentConfig c) {
    try {
      c.validate();
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  AgentConfig c;
  c.alpha = 1.5;
  CHECK(msg(c).find("alpha") != std::string::npos);
  c = {};
  c.alpha = 0.0;
  CHECK(msg(c).find("alpha") != std::string::npos);
  c = {};
  c.gamma = 1.0;
  CHECK(msg(c).find("gamma") != std::string::npos);
  c = {};
  c.epsilon = -0.1;
  CHECK(msg(c).find("epsilon") != std::string::npos);
  c = {};
  c.lambda = 1.0;
  CHECK(msg(c).find("lambda") != std::string::npos);
  CHECK(msg(AgentConfig{}).empty());
}

TEST_CASE("property: stored discounted reward matches the primitive rewards") {
  std::mt19937_64 rng(21);
  auto grid = make_environment("grid:reference");
  std::uniform_int_distribution<std::uint32_t> pick(0, 3);
  std::uniform_int_distribution<std::size_t> len(2, 8);
  for (int ep = 0; ep < 30; ++ep) {
    grid->reset();
    while (!grid->done()) {
      std::vector<std::uint32_t> macro(len(rng));
      for (auto& a : macro) a = pick(rng);
      MacroExecutionRecord rec = execute_macro(*grid, 4, macro, 0.95);
      double acc = 0, disc = 1;
      for (auto& st : rec.steps) {
        acc += disc * st.reward;
        disc *= 0.95;
      }
      CHECK(std::abs(acc - rec.reward) <= 1e-12);
      CHECK(rec.duration == rec.steps.size());
      CHECK(rec.duration >= 1);
      CHECK(rec.duration <= macro.size());
    }
  }
}

TEST_CASE("property: with no macros the agent matches a reference Q-learner exactly") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AgentConfig cfg;
    SmdpAgent agent(6, cfg);
    ReferenceQ ref{cfg.alpha, cfg.gamma, cfg.epsilon, 6, {}};
    Rng ra(seed), rb(seed);
    hanoi::HanoiEnv ea(3), eb(3);
    for (int ep = 0; ep < 200; ++ep) {
      ea.reset();
      eb.reset();
      while (!ea.done()) {
        ActionId a = agent.select(ea, cfg.epsilon, ra);
        agent.learn(agent.act(ea, a), true);
        StateId s = eb.state();
        ActionId b = ref.choose(s, rb);
        REQUIRE(a == b);
        StepResult r = eb.step(b);
        ref.update(s, b, r.reward, r.next, r.terminal);
      }
      REQUIRE(eb.done());
    }
    CHECK(same_as_reference(agent.q(), ref));
  }
}

TEST_CASE("TD(lambda) with lambda = 0 is one-step Q-learning bit for bit") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    AgentConfig cfg;
    cfg.lambda = 0.0;
    TdLambdaAgent td(6, cfg);
    ReferenceQ ref{cfg.alpha, cfg.gamma, cfg.epsilon, 6, {}};
    Rng ra(seed), rb(seed);
    hanoi::HanoiEnv ea(3), eb(3);
    for (int ep = 0; ep < 150; ++ep) {
      ea.reset();
      eb.reset();
      td.begin_episode(ea, ra);
      ActionId b = ref.choose(eb.state(), rb);
      while (!ea.done()) {
        REQUIRE(td.pending() == b);
        td.step(ea, ra);
        StateId s = eb.state();
        StepResult r = eb.step(b);
        ref.update(s, b, r.reward, r.next, r.terminal);
        if (!r.done) b = ref.choose(eb.state(), rb);
      }
      CHECK(td.live_traces() == 0);
    }
    CHECK(same_as_reference(td.q(), ref));
  }
}

TEST_CASE("TD(0.1) keeps short traces and reaches the 2-disk optimum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    AgentConfig cfg;
    cfg.lambda = 0.1;
    TdLambdaAgent td(6, cfg);
    hanoi::HanoiEnv env(2);
    Rng rng(seed);
    int solved_at = -1;
    for (int ep = 0; ep < 2000 && solved_at < 0; ++ep) {
      env.reset();
      td.begin_episode(env, rng);
      while (!env.done()) td.step(env, rng);
      if (greedy_td(env, td) == 3) solved_at = ep;
    }
    CHECK(solved_at >= 0);
  }
}

TEST_CASE("TD(lambda) is deterministic per seed") {
  auto curve = [](std::uint64_t seed) {
    AgentConfig cfg;
    cfg.lambda = 0.1;
    TdLambdaAgent td(6, cfg);
    hanoi::HanoiEnv env(3);
    Rng rng(seed);
    std::vector<std::size_t> steps;
    for (int ep = 0; ep < 100; ++ep) {
      env.reset();
      td.begin_episode(env, rng);
      while (!env.done()) td.step(env, rng);
      steps.push_back(env.steps());
    }
    return std::make_pair(steps, td.q().to_json().dump());
  };
  CHECK(curve(3) == curve(3));
}

TEST_CASE("3-disk training converges to the 7-step policy") {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SmdpAgent agent(6, AgentConfig{});
    hanoi::HanoiEnv env(3);
    Rng rng(seed);
    train_smdp(agent, env, 1500, rng);
    Rng eval(seed ^ 1);
    if (greedy_steps_to_goal(env, agent, eval) == 7) ++good;
  }
  CHECK(good >= 4);
}

TEST_CASE("property: Q values stay within [0, 100 / (1 - gamma)]") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    SmdpAgent agent(6, AgentConfig{});
    std::vector<MacroAction> set{MacroAction{0, moves("baf"), {}},
                                 MacroAction{1, moves("bc"), {}}};
    agent.set_active_macros(set);
    hanoi::HanoiEnv env(3);
    Rng rng(seed);
    train_smdp(agent, env, 500, rng);
    double hi = 100.0 / (1.0 - agent.config().gamma);
    for (auto& [s, row] : agent.q().rows()) {
      for (double v : row) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
        CHECK(v <= hi);
      }
    }
  }
}

TEST_CASE("checkpoint round trip") {
  AgentConfig cfg;
  cfg.mask_illegal = true;
  SmdpAgent agent(6, cfg);
  std::vector<MacroAction> set{MacroAction{0, {1, 0}, {}}};
  agent.set_active_macros(set);
  agent.register_macro({3, 4, 5});
  hanoi::HanoiEnv env(3);
  Rng rng(0);
  train_smdp(agent, env, 50, rng);
  nlohmann::json j = agent.to_json();
  SmdpAgent back = SmdpAgent::from_json(nlohmann::json::parse(j.dump()));
  CHECK(back.config() == agent.config());
  CHECK(back.registry() == agent.registry());
  CHECK(std::vector<ActionId>(back.active().begin(), back.active().end()) ==
        std::vector<ActionId>(agent.active().begin(), agent.active().end()));
  CHECK(back.q().same_values(agent.q()));
  CHECK(back.to_json() == j);

  nlohmann::json bad = j;
  bad["active"].push_back(99);
  CHECK_THROWS_AS(SmdpAgent::from_json(bad), ConfigError);
  bad = j;
  bad["config"]["alpha"] = 2.0;
  CHECK_THROWS_AS(SmdpAgent::from_json(bad), ConfigError);
  CHECK_THROWS_AS(SmdpAgent::from_json(nlohmann::json::object()), ConfigError);
}
