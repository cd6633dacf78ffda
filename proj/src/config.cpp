#include "actgram/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "actgram/errors.hpp"

namespace actgram {

namespace {

using nlohmann::json;

template <typename T>
T field(const json& obj, const std::string& section, const std::string& key) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(section + key + ": wrong type");
  }
}

void check_keys(const json& obj, const std::string& section, std::initializer_list<const char*> known) {
  if (!obj.is_object()) throw ConfigError((section.empty() ? "config" : section) + ": expected an object");
  for (const auto& [key, v] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ConfigError(section + key + ": unknown field");
  }
}

std::string env_kind(const std::string& env) { return env.substr(0, env.find(':')); }

int hanoi_disks(const std::string& env) {
  try {
    return std::stoi(env.substr(env.find(':') + 1));
  } catch (const std::exception&) {
    throw ConfigError("env: bad disk count in '" + env + "'");
  }
}

}  // namespace

std::string to_string(Paradigm p) {
  switch (p) {
    case Paradigm::kExpert: return "expert";
    case Paradigm::kTransfer: return "transfer";
    case Paradigm::kOnline: return "online";
    case Paradigm::kPrimitive: return "primitive";
    case Paradigm::kTdLambda: return "tdlambda";
  }
  return "?";
}

Paradigm paradigm_from_string(const std::string& s) {
  for (Paradigm p : {Paradigm::kExpert, Paradigm::kTransfer, Paradigm::kOnline, Paradigm::kPrimitive,
                     Paradigm::kTdLambda}) {
    if (to_string(p) == s) return p;
  }
  throw ConfigError("paradigm: expected expert, transfer, online, primitive or tdlambda, got '" + s + "'");
}

std::string to_string(BudgetUnit u) { return u == BudgetUnit::kUpdates ? "updates" : "episodes"; }

BudgetUnit budget_unit_from_string(const std::string& s) {
  if (s == "updates") return BudgetUnit::kUpdates;
  if (s == "episodes") return BudgetUnit::kEpisodes;
  throw ConfigError("loop.budget_unit: expected updates or episodes, got '" + s + "'");
}

void RunConfig::resolve() {
  std::string kind = env_kind(env);
  bool hanoi = kind == "hanoi";
  if (induction.l == 0) induction.l = hanoi ? 5 : 2;
  if (loop.grammar_interval == 0) loop.grammar_interval = hanoi ? 10000 : 500;
  if (loop.budget == 0) loop.budget = hanoi && hanoi_disks(env) >= 6 ? 7000000 : 300000;
  if (out.empty()) {
    std::string tag = env;
    for (char& c : tag) {
      if (c == ':' || c == '/' || c == '\\') c = '-';
    }
    out = default_output_root() + "/" + to_string(loop.paradigm) + "-" + tag;
  }
}

void RunConfig::validate() const {
  std::string kind = env_kind(env);
  if (kind != "hanoi" && kind != "grid") throw ConfigError("env: expected hanoi:N or grid:LAYOUT, got '" + env + "'");
  if (kind == "hanoi") {
    int n = hanoi_disks(env);
    if (n < 2 || n > 12) throw ConfigError("env: disk count must be in [2, 12]");
  }
  agent.validate();
  if (induction.k < 2) throw ConfigError("induction.k must be >= 2");
  if (induction.l < 1) throw ConfigError("induction.l must be >= 1");
  if (loop.warmup < 0) throw ConfigError("loop.warmup must be >= 0");
  if (loop.grammar_interval < 1) throw ConfigError("loop.grammar_interval must be >= 1");
  if (loop.k_start < 2) throw ConfigError("loop.k_start must be >= 2");
  if (loop.k_end < 2) throw ConfigError("loop.k_end must be >= 2");
  if (loop.num_grammar_updates < 0) throw ConfigError("loop.num_grammar_updates must be >= 0");
  if (loop.n_g < 1) throw ConfigError("loop.n_g must be >= 1");
  if (loop.budget < 1) throw ConfigError("loop.budget must be >= 1");
  if (loop.replay_batch < 1) throw ConfigError("loop.replay_batch must be >= 1");
  if (loop.replay_capacity < 1) throw ConfigError("loop.replay_capacity must be >= 1");
  if (loop.checkpoint_every < 0) throw ConfigError("loop.checkpoint_every must be >= 0");
  if (loop.paradigm == Paradigm::kTransfer && loop.transfer_source.empty()) {
    throw ConfigError("loop.transfer_source: required for the transfer paradigm");
  }
  if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
}

long scheduled_inductions(const RunConfig& cfg) {
  if (cfg.loop.budget <= cfg.loop.warmup) return 0;
  return (cfg.loop.budget - cfg.loop.warmup - 1) / cfg.loop.grammar_interval + 1;
}

json to_json(const RunConfig& cfg) {
  const LoopConfig& l = cfg.loop;
  return {{"env", cfg.env},
          {"paradigm", to_string(l.paradigm)},
          {"seeds", cfg.seeds},
          {"out", cfg.out},
          {"agent", to_json(cfg.agent)},
          {"induction", {{"algo", to_string(cfg.induction.algorithm)}, {"k", cfg.induction.k}, {"l", cfg.induction.l}}},
          {"loop",
           {{"warmup", l.warmup},
            {"grammar_interval", l.grammar_interval},
            {"k_start", l.k_start},
            {"k_end", l.k_end},
            {"num_grammar_updates", l.num_grammar_updates},
            {"n_g", l.n_g},
            {"budget", l.budget},
            {"budget_unit", to_string(l.budget_unit)},
            {"intra_macro", l.intra_macro},
            {"replay", l.replay},
            {"replay_batch", l.replay_batch},
            {"replay_capacity", l.replay_capacity},
            {"eval_greedy", l.eval_greedy},
            {"expert_source", l.expert_source},
            {"transfer_source", l.transfer_source},
            {"checkpoint_every", l.checkpoint_every}}}};
}

RunConfig parse_config(const json& file, const json& overrides) {
  json j = file.is_null() ? json::object() : file;
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  j.merge_patch(overrides);
  check_keys(j, "", {"env", "paradigm", "seeds", "out", "agent", "induction", "loop"});

  RunConfig cfg;
  if (j.contains("env")) cfg.env = field<std::string>(j, "", "env");
  if (j.contains("paradigm")) cfg.loop.paradigm = paradigm_from_string(field<std::string>(j, "", "paradigm"));
  if (j.contains("seeds")) cfg.seeds = field<std::vector<std::uint64_t>>(j, "", "seeds");
  if (j.contains("out")) cfg.out = field<std::string>(j, "", "out");

  json agent = j.value("agent", json::object());
  if (!agent.contains("lambda") && cfg.loop.paradigm == Paradigm::kTdLambda) agent["lambda"] = 0.1;
  cfg.agent = agent_config_from_json(agent);

  if (j.contains("induction")) {
    const json& ind = j["induction"];
    check_keys(ind, "induction.", {"algo", "k", "l"});
    if (ind.contains("algo")) cfg.induction.algorithm = induction_algorithm_from_string(field<std::string>(ind, "induction.", "algo"));
    if (ind.contains("k")) cfg.induction.k = field<int>(ind, "induction.", "k");
    if (ind.contains("l")) cfg.induction.l = field<int>(ind, "induction.", "l");
  }

  if (j.contains("loop")) {
    const json& lj = j["loop"];
    const std::string s = "loop.";
    check_keys(lj, s,
               {"warmup", "grammar_interval", "k_start", "k_end", "num_grammar_updates", "n_g", "budget",
                "budget_unit", "intra_macro", "replay", "replay_batch", "replay_capacity", "eval_greedy",
                "expert_source", "transfer_source", "checkpoint_every"});
    LoopConfig& l = cfg.loop;
    if (lj.contains("warmup")) l.warmup = field<long>(lj, s, "warmup");
    if (lj.contains("grammar_interval")) l.grammar_interval = field<long>(lj, s, "grammar_interval");
    if (lj.contains("k_start")) l.k_start = field<int>(lj, s, "k_start");
    if (lj.contains("k_end")) l.k_end = field<int>(lj, s, "k_end");
    if (lj.contains("num_grammar_updates")) l.num_grammar_updates = field<int>(lj, s, "num_grammar_updates");
    if (lj.contains("n_g")) l.n_g = field<int>(lj, s, "n_g");
    if (lj.contains("budget")) l.budget = field<long>(lj, s, "budget");
    if (lj.contains("budget_unit")) l.budget_unit = budget_unit_from_string(field<std::string>(lj, s, "budget_unit"));
    if (lj.contains("intra_macro")) l.intra_macro = field<bool>(lj, s, "intra_macro");
    if (lj.contains("replay")) l.replay = field<bool>(lj, s, "replay");
    if (lj.contains("replay_batch")) l.replay_batch = field<int>(lj, s, "replay_batch");
    if (lj.contains("replay_capacity")) l.replay_capacity = field<long>(lj, s, "replay_capacity");
    if (lj.contains("eval_greedy")) l.eval_greedy = field<bool>(lj, s, "eval_greedy");
    if (lj.contains("expert_source")) l.expert_source = field<std::string>(lj, s, "expert_source");
    if (lj.contains("transfer_source")) l.transfer_source = field<std::string>(lj, s, "transfer_source");
    if (lj.contains("checkpoint_every")) l.checkpoint_every = field<long>(lj, s, "checkpoint_every");
  }
  cfg.resolve();
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path, const json& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  json file = json::object();
  if (text.find_first_not_of(" \t\r\n") != std::string::npos) {
    try {
      file = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError("config: " + std::string(e.what()));
    }
  }
  return parse_config(file, overrides);
}

void set_override(json& patch, const std::string& dotted_key, const std::string& value, bool as_string) {
  json v = value;
  if (!as_string) {
    try {
      v = json::parse(value);
    } catch (const json::parse_error&) {
      v = value;
    }
  }
  json* node = &patch;
  std::size_t start = 0;
  while (true) {
    auto dot = dotted_key.find('.', start);
    std::string part = dotted_key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override: bad key '" + dotted_key + "'");
    if (dot == std::string::npos) {
      (*node)[part] = v;
      return;
    }
    if (!(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::string default_output_root() {
  const char* root = std::getenv("ACTGRAM_OUTPUT_ROOT");
  return root != nullptr && *root != '\0' ? root : "runs";
}

}  // namespace actgram
