#include "actgram/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "actgram/errors.hpp"
#include "actgram/hanoi.hpp"
#include "actgram/induction.hpp"
#include "actgram/metrics.hpp"
#include "actgram/replay_buffer.hpp"
#include "actgram/td_lambda.hpp"

namespace actgram {

namespace {

using nlohmann::json;

constexpr std::uint64_t kEvalStream = 0x9e3779b97f4a7c15ULL;

std::string render_actions(const Alphabet& alphabet, const ActionSequence& actions) {
  SymbolString seq;
  for (std::uint32_t a : actions) seq.push_back(Symbol::terminal(a));
  return alphabet.render(seq);
}

std::string read_file(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw ConfigError(what + ": cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<int> hanoi_disks(const std::string& spec) {
  if (spec.rfind("hanoi:", 0) != 0) return std::nullopt;
  try {
    return std::stoi(spec.substr(6));
  } catch (const std::exception&) {
    throw ConfigError("bad hanoi spec '" + spec + "'");
  }
}

/// Splits a parsed symbol string on separators into traces.
std::vector<Trace> split_traces(const SymbolString& seq) {
  std::vector<Trace> out;
  SymbolString cur;
  for (Symbol s : seq) {
    if (s.is_separator()) {
      if (!cur.empty()) out.emplace_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(s);
    }
  }
  if (!cur.empty()) out.emplace_back(std::move(cur));
  return out;
}

void describe(InductionRecord& rec, const Grammar& g, const std::vector<MacroAction>& macros,
              const Alphabet& alphabet, const std::optional<Grammar>& reference, int l) {
  rec.productions = g.production_count();
  rec.compression = compression_ratio(g);
  double h_src = entropy(g.expand_encoded());
  double h_enc = entropy(g.encoded());
  rec.entropy_ratio = h_src > 0.0 ? h_enc / h_src : 1.0;
  rec.macros.clear();
  for (const MacroAction& m : macros) rec.macros.push_back(render_actions(alphabet, m.actions));
  rec.levenshtein.clear();
  if (reference) {
    std::vector<ActionSequence> mine, ref;
    for (const MacroAction& m : macros) mine.push_back(m.actions);
    for (const MacroAction& m : select_top_l(*reference, l)) ref.push_back(m.actions);
    rec.levenshtein = match_distances(mine, ref);
  }
  rec.grammar = grammar_to_json(g, alphabet);
}

std::string rng_state(const Rng& rng) {
  std::ostringstream out;
  out << rng;
  return out.str();
}

void restore_rng(Rng& rng, const std::string& state) {
  std::istringstream in(state);
  in >> rng;
  if (!in) throw ConfigError("checkpoint: bad rng state");
}

class Runner {
 public:
  Runner(const RunConfig& cfg, std::uint64_t seed, const SeedHooks& hooks)
      : cfg_(cfg),
        hooks_(hooks),
        env_(make_environment(cfg.env)),
        agent_(env_->num_actions(), cfg.agent),
        rng_(seed),
        eval_rng_(seed ^ kEvalStream) {
    log_.seed = seed;
    if (cfg.loop.paradigm == Paradigm::kTdLambda) td_.emplace(env_->num_actions(), cfg.agent);
    if (cfg.loop.replay) {
      buffer_.emplace(env_->num_actions(), static_cast<std::size_t>(cfg.loop.replay_capacity));
    }
    reference_ = reference_grammar(cfg.env);
    scheduled_ = scheduled_inductions(cfg);
    if (cfg.loop.num_grammar_updates > 0) {
      decay_updates_ = cfg.loop.num_grammar_updates;
    } else if (cfg.loop.budget_unit == BudgetUnit::kUpdates) {
      decay_updates_ = static_cast<int>(std::max(0L, scheduled_ - 1));
    } else {
      decay_updates_ = std::abs(cfg.loop.k_start - cfg.loop.k_end);
    }
  }

  SeedLog run() {
    if (hooks_.resume != nullptr) {
      restore(*hooks_.resume);
    } else {
      setup();
    }
    const LoopConfig& loop = cfg_.loop;
    long since_checkpoint = 0;
    while (!finished()) {
      if (hooks_.stop != nullptr && hooks_.stop->load()) {
        log_.interrupted = true;
        break;
      }
      if (loop.paradigm == Paradigm::kOnline) maybe_induce();
      EpisodeRow row = td_ ? td_episode() : smdp_episode();
      log_.episodes.push_back(row);
      if (loop.checkpoint_every > 0 && ++since_checkpoint >= loop.checkpoint_every) {
        since_checkpoint = 0;
        log_.checkpoint = checkpoint();
        if (hooks_.on_checkpoint) hooks_.on_checkpoint(log_);
      }
    }
    log_.checkpoint = checkpoint();
    return std::move(log_);
  }

 private:
  bool finished() const {
    if (cfg_.loop.budget_unit == BudgetUnit::kUpdates) return log_.updates >= cfg_.loop.budget;
    return static_cast<long>(log_.episodes.size()) >= cfg_.loop.budget;
  }

  void setup() {
    Paradigm p = cfg_.loop.paradigm;
    if (p != Paradigm::kExpert && p != Paradigm::kTransfer) return;
    InductionRecord rec;
    auto macros = p == Paradigm::kExpert ? expert_macros(cfg_, *env_, rec) : transfer_macros(cfg_, *env_, rec);
    activate(macros);
    log_.induction_calls = 1;
    current_k_ = rec.k;
    log_.inductions.push_back(std::move(rec));
  }

  void activate(const std::vector<MacroAction>& macros) {
    auto ids = agent_.set_active_macros(macros);
    if (buffer_) buffer_->set_active(ids);
  }

  void maybe_induce() {
    const LoopConfig& loop = cfg_.loop;
    if (log_.updates < loop.warmup) return;
    long slot = (log_.updates - loop.warmup) / loop.grammar_interval;
    if (slot < next_slot_) return;
    if (loop.budget_unit == BudgetUnit::kUpdates && slot >= scheduled_) return;
    next_slot_ = slot + 1;

    InductionRecord rec;
    rec.episode = static_cast<long>(log_.episodes.size());
    rec.updates = log_.updates;
    rec.index = static_cast<int>(slot);
    rec.k = k_schedule(rec.index, loop.k_start, loop.k_end, decay_updates_);

    std::vector<Trace> good;
    for (int attempt = 0; attempt < 3 * loop.n_g && static_cast<int>(good.size()) < loop.n_g; ++attempt) {
      auto traces = rollout(*env_, agent_, 0.0, 1, eval_rng_);
      if (traces.front().meta().success) good.push_back(traces.front());
    }
    if (good.empty()) {
      rec.skipped = true;
      rec.note = "no successful greedy rollout";
      rec.macros.clear();
      for (const MacroAction& m : agent_.active_macros()) rec.macros.push_back(render_actions(env_->alphabet(), m.actions));
      log_.inductions.push_back(std::move(rec));
      return;
    }
    InductionConfig ic = cfg_.induction;
    ic.k = rec.k;
    Grammar g = induce(good, env_->num_actions(), ic);
    ++log_.induction_calls;
    auto macros = select_top_l(g, ic.l);
    activate(macros);
    current_k_ = rec.k;
    describe(rec, g, macros, env_->alphabet(), reference_, ic.l);
    log_.inductions.push_back(std::move(rec));
  }

  void replay_updates() {
    if (!buffer_ || buffer_->active_size() == 0) return;
    for (const Transition& t : buffer_->sample(static_cast<std::size_t>(cfg_.loop.replay_batch), rng_)) {
      q_update(agent_.q(), t.s, t.action, t.reward, t.next, t.duration, t.terminal, agent_.active(), agent_.config());
    }
  }

  bool out_of_updates() const {
    return cfg_.loop.budget_unit == BudgetUnit::kUpdates && log_.updates >= cfg_.loop.budget;
  }

  EpisodeRow smdp_episode() {
    EpisodeRow row;
    row.episode = static_cast<long>(log_.episodes.size());
    env_->reset();
    bool success = false;
    while (!env_->done() && !out_of_updates()) {
      ActionId a = agent_.select(*env_, cfg_.agent.epsilon, rng_);
      MacroExecutionRecord rec = agent_.act(*env_, a);
      agent_.learn(rec, cfg_.loop.intra_macro);
      for (const PrimitiveStep& st : rec.steps) row.ret += st.reward;
      row.env_steps += static_cast<long>(rec.duration);
      ++row.decision_steps;
      ++log_.updates;
      success = rec.success;
      if (buffer_) {
        buffer_->push(rec);
        replay_updates();
      }
    }
    finish_row(row, success);
    return row;
  }

  EpisodeRow td_episode() {
    EpisodeRow row;
    row.episode = static_cast<long>(log_.episodes.size());
    env_->reset();
    td_->begin_episode(*env_, rng_);
    bool success = false;
    while (!env_->done() && !out_of_updates()) {
      StepResult r = td_->step(*env_, rng_);
      row.ret += r.reward;
      ++row.env_steps;
      ++row.decision_steps;
      ++log_.updates;
      success = r.success;
    }
    finish_row(row, success);
    return row;
  }

  long td_greedy() {
    auto env = env_->clone();
    env->reset();
    bool success = false;
    while (!env->done()) {
      std::vector<ActionId> cand(td_->active().begin(), td_->active().end());
      if (cfg_.agent.mask_illegal) {
        std::vector<ActionId> legal;
        for (ActionId a : cand) {
          if (env->is_legal(a)) legal.push_back(a);
        }
        if (!legal.empty()) cand = legal;
      }
      success = env->step(epsilon_greedy(td_->q(), env->state(), cand, 0.0, eval_rng_)).success;
    }
    return success ? static_cast<long>(env->steps()) : -1;
  }

  void finish_row(EpisodeRow& row, bool success) {
    if (cfg_.loop.eval_greedy) {
      row.steps_to_goal = td_ ? td_greedy() : greedy_steps_to_goal(*env_, agent_, eval_rng_);
    } else {
      row.steps_to_goal = success ? row.env_steps : -1;
    }
    row.active_macros = static_cast<int>(agent_.active_macro_count());
    row.k = current_k_;
    row.updates = log_.updates;
  }

  json checkpoint() const {
    json eps = json::array();
    for (const EpisodeRow& r : log_.episodes) eps.push_back(to_json(r));
    json inds = json::array();
    for (const InductionRecord& r : log_.inductions) inds.push_back(to_json(r));
    json j = {{"seed", log_.seed},
              {"config", to_json(cfg_)},
              {"updates", log_.updates},
              {"next_slot", next_slot_},
              {"current_k", current_k_},
              {"induction_calls", log_.induction_calls},
              {"rng", rng_state(rng_)},
              {"eval_rng", rng_state(eval_rng_)},
              {"agent", agent_.to_json()},
              {"episodes", eps},
              {"inductions", inds}};
    if (td_) j["td_q"] = td_->q().to_json();
    return j;
  }

  void restore(const json& j) {
    try {
      if (j.at("seed").get<std::uint64_t>() != log_.seed) throw ConfigError("checkpoint: seed mismatch");
      log_.updates = j.at("updates").get<long>();
      next_slot_ = j.at("next_slot").get<long>();
      current_k_ = j.at("current_k").get<int>();
      log_.induction_calls = j.at("induction_calls").get<std::size_t>();
      restore_rng(rng_, j.at("rng").get<std::string>());
      restore_rng(eval_rng_, j.at("eval_rng").get<std::string>());
      agent_ = SmdpAgent::from_json(j.at("agent"));
      if (buffer_) buffer_->set_active(std::vector<ActionId>(agent_.active().begin(), agent_.active().end()));
      for (const json& r : j.at("episodes")) log_.episodes.push_back(episode_row_from_json(r));
      for (const json& r : j.at("inductions")) log_.inductions.push_back(induction_record_from_json(r));
      if (td_) td_->q() = QTable::from_json(j.at("td_q"));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("checkpoint: ") + e.what());
    }
  }

  const RunConfig& cfg_;
  SeedHooks hooks_;
  std::unique_ptr<Environment> env_;
  SmdpAgent agent_;
  std::optional<TdLambdaAgent> td_;
  std::optional<GrammarReplayBuffer> buffer_;
  std::optional<Grammar> reference_;
  Rng rng_;
  Rng eval_rng_;
  SeedLog log_;
  long scheduled_ = 0;
  int decay_updates_ = 0;
  long next_slot_ = 0;
  int current_k_ = 0;
};

}  // namespace

int k_schedule(int index, int k_start, int k_end, int num_updates) {
  if (num_updates <= 0) return std::max(2, k_end);
  int i = std::clamp(index, 0, num_updates);
  double k = k_start + static_cast<double>(k_end - k_start) * i / num_updates;
  return std::max(2, static_cast<int>(std::lround(k)));
}

std::vector<Trace> rollout(const Environment& proto, const SmdpAgent& agent, double epsilon, std::size_t n,
                           Rng& rng) {
  std::vector<Trace> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto env = proto.clone();
    env->reset();
    SymbolString seq;
    bool success = false;
    while (!env->done()) {
      MacroExecutionRecord rec = agent.act(*env, agent.select(*env, epsilon, rng));
      for (const PrimitiveStep& st : rec.steps) seq.push_back(Symbol::terminal(st.action));
      success = rec.success;
    }
    out.emplace_back(std::move(seq), TraceMeta{0, i, success});
  }
  return out;
}

long greedy_steps_to_goal(const Environment& proto, const SmdpAgent& agent, Rng& rng) {
  auto env = proto.clone();
  env->reset();
  bool success = false;
  while (!env->done()) success = agent.act(*env, agent.select(*env, 0.0, rng)).success;
  return success ? static_cast<long>(env->steps()) : -1;
}

std::optional<Grammar> reference_grammar(const std::string& env_spec) {
  auto n = hanoi_disks(env_spec);
  if (!n) return std::nullopt;
  return sequitur_infer(hanoi::hanoi_optimal_trace(*n), hanoi::kMoves.size(), 2);
}

std::vector<MacroAction> expert_macros(const RunConfig& cfg, const Environment& env, InductionRecord& record) {
  const std::string& src = cfg.loop.expert_source;
  std::vector<Trace> traces;
  if (src == "optimal") {
    auto n = hanoi_disks(cfg.env);
    if (!n) throw ConfigError("loop.expert_source: 'optimal' needs a hanoi environment");
    traces.push_back(hanoi::hanoi_optimal_trace(*n));
  } else if (src.rfind("trace:", 0) == 0) {
    traces = split_traces(env.alphabet().parse(read_file(src.substr(6), "loop.expert_source")));
  } else if (src.rfind("checkpoint:", 0) == 0) {
    json j;
    try {
      j = json::parse(read_file(src.substr(11), "loop.expert_source"));
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("loop.expert_source: ") + e.what());
    }
    SmdpAgent expert = SmdpAgent::from_json(j.contains("agent") ? j["agent"] : j);
    if (expert.num_primitives() != env.num_actions()) {
      throw ConfigError("loop.expert_source: checkpoint action count does not match the environment");
    }
    Rng rng(0);
    traces = rollout(env, expert, 0.0, 1, rng);
  } else {
    throw ConfigError("loop.expert_source: expected optimal, trace:PATH or checkpoint:PATH, got '" + src + "'");
  }
  if (traces.empty()) throw ConfigError("loop.expert_source: empty expert trace");
  Grammar g = induce(traces, env.num_actions(), cfg.induction);
  auto macros = select_top_l(g, cfg.induction.l);
  record.k = cfg.induction.k;
  describe(record, g, macros, env.alphabet(), reference_grammar(cfg.env), cfg.induction.l);
  return macros;
}

std::vector<MacroAction> transfer_macros(const RunConfig& cfg, const Environment& env, InductionRecord& record) {
  const std::string& src = cfg.loop.transfer_source;
  GrammarDump dump;
  if (auto n = hanoi_disks(src)) {
    if (*n < hanoi::kMinDisks || *n > hanoi::kMaxDisks) throw ConfigError("loop.transfer_source: disk count out of range");
    dump.alphabet = hanoi::alphabet();
    dump.grammar = induce({hanoi::hanoi_optimal_trace(*n)}, dump.alphabet.size(), cfg.induction);
  } else {
    try {
      dump = grammar_from_json(json::parse(read_file(src, "loop.transfer_source")));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("loop.transfer_source: ") + e.what());
    }
  }
  std::vector<std::uint32_t> remap;
  for (const std::string& name : dump.alphabet.names()) {
    auto idx = env.alphabet().find(name);
    if (!idx) throw ConfigError("loop.transfer_source: symbol '" + name + "' is not in the target alphabet");
    remap.push_back(*idx);
  }
  auto macros = select_top_l(dump.grammar, cfg.induction.l);
  for (MacroAction& m : macros) {
    for (std::uint32_t& a : m.actions) a = remap.at(a);
  }
  record.k = cfg.induction.k;
  describe(record, dump.grammar, macros, env.alphabet(), reference_grammar(cfg.env), cfg.induction.l);
  record.grammar = grammar_to_json(dump.grammar, dump.alphabet);
  return macros;
}

SeedLog run_seed(const RunConfig& cfg, std::uint64_t seed, const SeedHooks& hooks) {
  Runner runner(cfg, seed, hooks);
  return runner.run();
}

RunLog run_experiment(const RunConfig& cfg, const RunOptions& opts) {
  RunLog out;
  out.config = cfg;
  out.seeds.resize(cfg.seeds.size());
  unsigned threads = opts.threads;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.seeds.size()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      try {
        SeedHooks hooks;
        hooks.stop = opts.stop;
        hooks.on_checkpoint = opts.on_checkpoint;
        std::optional<json> resume;
        if (opts.resume) resume = opts.resume(cfg.seeds[i]);
        if (resume) hooks.resume = &*resume;
        out.seeds[i] = run_seed(cfg, cfg.seeds[i], hooks);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return out;
}

RunLog run_expert(RunConfig cfg) {
  cfg.loop.paradigm = Paradigm::kExpert;
  return run_experiment(cfg);
}

RunLog run_transfer(RunConfig cfg) {
  cfg.loop.paradigm = Paradigm::kTransfer;
  return run_experiment(cfg);
}

RunLog run_online(RunConfig cfg) {
  cfg.loop.paradigm = Paradigm::kOnline;
  return run_experiment(cfg);
}

long episodes_to_reach(const SeedLog& log, long target) {
  for (const EpisodeRow& r : log.episodes) {
    if (r.steps_to_goal == target) return r.episode + 1;
  }
  return -1;
}

json to_json(const EpisodeRow& r) {
  return {{"episode", r.episode},         {"env_steps", r.env_steps},         {"decision_steps", r.decision_steps},
          {"return", r.ret},              {"steps_to_goal", r.steps_to_goal}, {"active_macros", r.active_macros},
          {"k", r.k},                     {"updates", r.updates}};
}

EpisodeRow episode_row_from_json(const json& j) {
  EpisodeRow r;
  r.episode = j.at("episode").get<long>();
  r.env_steps = j.at("env_steps").get<long>();
  r.decision_steps = j.at("decision_steps").get<long>();
  r.ret = j.at("return").get<double>();
  r.steps_to_goal = j.at("steps_to_goal").get<long>();
  r.active_macros = j.at("active_macros").get<int>();
  r.k = j.at("k").get<int>();
  r.updates = j.at("updates").get<long>();
  return r;
}

json to_json(const InductionRecord& r) {
  return {{"episode", r.episode},
          {"updates", r.updates},
          {"index", r.index},
          {"k", r.k},
          {"skipped", r.skipped},
          {"note", r.note},
          {"productions", r.productions},
          {"compression", r.compression},
          {"entropy_ratio", r.entropy_ratio},
          {"levenshtein", r.levenshtein},
          {"macros", r.macros},
          {"grammar", r.grammar}};
}

InductionRecord induction_record_from_json(const json& j) {
  InductionRecord r;
  r.episode = j.at("episode").get<long>();
  r.updates = j.at("updates").get<long>();
  r.index = j.at("index").get<int>();
  r.k = j.at("k").get<int>();
  r.skipped = j.at("skipped").get<bool>();
  r.note = j.at("note").get<std::string>();
  r.productions = j.at("productions").get<std::size_t>();
  r.compression = j.at("compression").get<double>();
  r.entropy_ratio = j.at("entropy_ratio").get<double>();
  r.levenshtein = j.at("levenshtein").get<std::vector<std::size_t>>();
  r.macros = j.at("macros").get<std::vector<std::string>>();
  r.grammar = j.at("grammar");
  return r;
}

}  // namespace actgram
