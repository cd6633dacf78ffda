#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

#include "CLI11.hpp"
#include "actgram/config.hpp"
#include "actgram/errors.hpp"
#include "actgram/experiment.hpp"
#include "actgram/hanoi.hpp"
#include "actgram/induction.hpp"
#include "actgram/metrics.hpp"
#include "actgram/run_log.hpp"

using namespace actgram;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  try {
    if (text.find(',') == std::string::npos) {
      std::uint64_t n = std::stoull(text);
      for (std::uint64_t i = 0; i < n; ++i) out.push_back(i);
    } else {
      std::stringstream ss(text);
      std::string part;
      while (std::getline(ss, part, ',')) out.push_back(std::stoull(part));
    }
  } catch (const std::exception&) {
    throw ConfigError("seeds: expected a count or a comma-separated list, got '" + text + "'");
  }
  return out;
}

Alphabet alphabet_for(const std::string& env_spec, const std::string& text) {
  if (!env_spec.empty()) return make_environment(env_spec)->alphabet();
  return Alphabet::from_text(text);
}

std::vector<Trace> traces_of(const SymbolString& seq) {
  std::vector<Trace> out;
  SymbolString cur;
  for (Symbol s : seq) {
    if (s.is_separator()) {
      if (!cur.empty()) out.emplace_back(cur);
      cur.clear();
    } else {
      cur.push_back(s);
    }
  }
  if (!cur.empty()) out.emplace_back(cur);
  if (out.empty()) throw ConfigError("trace: no symbols");
  return out;
}

struct RunArgs {
  std::string config_file;
  std::string resume_dir;
  std::vector<std::string> sets;
  std::string seeds;
  unsigned threads = 0;
  bool print_config = false;
  json patch = json::object();
};

int cmd_run(RunArgs& a) {
  RunConfig cfg;
  fs::path out_dir;
  if (!a.resume_dir.empty()) {
    out_dir = a.resume_dir;
    cfg = load_config((out_dir / "config.json").string());
  } else {
    for (const std::string& s : a.sets) {
      auto eq = s.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + s + "'");
      set_override(a.patch, s.substr(0, eq), s.substr(eq + 1));
    }
    if (!a.seeds.empty()) a.patch["seeds"] = parse_seeds(a.seeds);
    cfg = a.config_file.empty() ? parse_config(json::object(), a.patch) : load_config(a.config_file, a.patch);
    out_dir = cfg.out;
  }
  if (a.print_config) {
    std::cout << to_json(cfg).dump(2) << '\n';
    return 0;
  }
  fs::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "config.json");
    out << to_json(cfg).dump(2) << '\n';
  }
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);

  RunOptions opts;
  opts.stop = &g_stop;
  opts.threads = a.threads;
  opts.on_checkpoint = [&](const SeedLog& log) { emit_seed(log, out_dir); };
  if (!a.resume_dir.empty()) {
    opts.resume = [&](std::uint64_t seed) -> std::optional<json> {
      fs::path p = out_dir / "checkpoints" / ("seed_" + std::to_string(seed) + ".json");
      if (!fs::exists(p)) return std::nullopt;
      return json::parse(read_file(p.string()));
    };
  }
  RunLog log = run_experiment(cfg, opts);
  emit_run_log(log, out_dir);

  long optimal = 0;
  if (auto env = make_environment(cfg.env)) optimal = static_cast<long>(env->optimal_steps());
  for (const SeedLog& s : log.seeds) {
    std::cout << "seed " << s.seed << ": episodes=" << s.episodes.size() << " updates=" << s.updates
              << " inductions=" << s.induction_calls;
    if (optimal > 0) std::cout << " first_optimal_episode=" << episodes_to_reach(s, optimal);
    if (!s.episodes.empty()) std::cout << " final_steps_to_goal=" << s.episodes.back().steps_to_goal;
    if (s.interrupted) std::cout << " (interrupted)";
    std::cout << '\n';
  }
  std::cout << "wrote " << out_dir.string() << '\n';
  return g_stop ? 130 : 0;
}

int cmd_induce(const std::string& algo, int k, int l, const std::string& trace_file, const std::string& text_arg,
               const std::string& env_spec) {
  std::string text = trim(trace_file.empty() ? text_arg : read_file(trace_file));
  if (text.empty()) throw ConfigError("induce: give --trace FILE or --text STRING");
  Alphabet alphabet = alphabet_for(env_spec, text);
  InductionConfig cfg{induction_algorithm_from_string(algo), k, l};
  cfg.validate();
  Grammar g = induce(traces_of(alphabet.parse(text)), alphabet.size(), cfg);
  std::cout << grammar_to_json(g, alphabet).dump(2) << '\n';
  std::vector<std::string> macros;
  for (const MacroAction& m : select_top_l(g, l)) {
    SymbolString seq;
    for (auto x : m.actions) seq.push_back(Symbol::terminal(x));
    macros.push_back(alphabet.render(seq));
  }
  std::cout << "ratio=" << format_number(compression_ratio(g)) << " productions=" << g.production_count()
            << " encoded_length=" << content_length(g.encoded()) << " top_l=";
  for (std::size_t i = 0; i < macros.size(); ++i) std::cout << (i ? "," : "") << macros[i];
  std::cout << '\n';
  return 0;
}

int cmd_stats(const std::string& grammar_file, const std::string& optimal_file, const std::string& env_spec,
              int l) {
  GrammarDump dump = grammar_from_json(json::parse(read_file(grammar_file)));
  std::optional<Grammar> optimal;
  if (!optimal_file.empty()) {
    GrammarDump od = grammar_from_json(json::parse(read_file(optimal_file)));
    if (!(od.alphabet == dump.alphabet)) throw ConfigError("stats: grammars use different alphabets");
    optimal = od.grammar;
  } else if (!env_spec.empty()) {
    optimal = reference_grammar(env_spec);
  }
  const Grammar& g = dump.grammar;
  GrammarStats st = grammar_stats(g.expand_encoded(), g, optimal ? *optimal : g, l);
  std::cout << "compression=" << format_number(st.compression) << " entropy_ratio=" << format_number(st.entropy_ratio)
            << " productions=" << g.production_count();
  if (optimal) {
    std::cout << " levenshtein=";
    for (std::size_t i = 0; i < st.levenshtein.size(); ++i) std::cout << (i ? "," : "") << st.levenshtein[i];
    std::cout << " median_levenshtein=" << format_number(st.median_levenshtein());
  }
  std::cout << '\n';
  return 0;
}

int cmd_rollout(const std::string& env_spec, const std::string& checkpoint, int episodes, double epsilon,
                std::uint64_t seed) {
  auto env = make_environment(env_spec);
  if (checkpoint.empty()) {
    auto n = env_spec.rfind("hanoi:", 0) == 0 ? std::stoi(env_spec.substr(6)) : 0;
    if (n == 0) throw ConfigError("rollout: --checkpoint required for this environment");
    std::cout << env->alphabet().render(hanoi::hanoi_optimal_trace(n).symbols()) << " success=1\n";
    return 0;
  }
  json j = json::parse(read_file(checkpoint));
  SmdpAgent agent = SmdpAgent::from_json(j.contains("agent") ? j["agent"] : j);
  Rng rng(seed);
  for (const Trace& t : rollout(*env, agent, epsilon, static_cast<std::size_t>(episodes), rng)) {
    std::cout << env->alphabet().render(t.symbols()) << " success=" << (t.meta().success ? 1 : 0) << '\n';
  }
  return 0;
}

int cmd_replay_trace(const std::string& env_spec, const std::string& trace_file, const std::string& text_arg,
                     bool verbose) {
  auto env = make_environment(env_spec);
  std::string text = trim(trace_file.empty() ? text_arg : read_file(trace_file));
  SymbolString seq = env->alphabet().parse(text);
  env->reset();
  double total = 0;
  long illegal = 0, steps = 0;
  bool success = false;
  for (Symbol s : seq) {
    if (s.is_separator()) continue;
    if (env->done()) {
      std::cout << "episode ended before the trace did\n";
      break;
    }
    StepResult r = env->step(s.index());
    ++steps;
    total += r.reward;
    illegal += r.illegal ? 1 : 0;
    success = r.success;
    if (verbose) {
      std::cout << steps << ' ' << env->alphabet().name(s.index()) << " state=" << r.next
                << " reward=" << format_number(r.reward) << (r.illegal ? " illegal" : "") << (r.done ? " done" : "")
                << '\n';
    }
  }
  std::cout << "steps=" << steps << " return=" << format_number(total) << " illegal=" << illegal
            << " done=" << (env->done() ? 1 : 0) << " success=" << (success ? 1 : 0) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"actgram: grammar-induced macro-actions for tabular SMDP Q-learning"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "train agents over several seeds and write CSV logs");
  run_cmd->add_option("--config", run.config_file, "JSON config file");
  run_cmd->add_option("--seeds", run.seeds, "seed count N (0..N-1) or list a,b,c");
  run_cmd->add_option("--threads", run.threads, "parallel workers (0 = all cores)");
  run_cmd->add_option("--set", run.sets, "override any field, e.g. --set loop.warmup=1000");
  run_cmd->add_option("--resume", run.resume_dir, "continue an interrupted run in DIR");
  run_cmd->add_flag("--print-config", run.print_config, "print the resolved config and exit");
  struct Flag {
    const char* name;
    const char* key;
    const char* help;
    bool text;  // string-valued field
  };
  static const Flag kRunFlags[] = {
      {"--paradigm", "paradigm", "expert | transfer | online | primitive | tdlambda", true},
      {"--env", "env", "hanoi:N or grid:LAYOUT (grid:reference)", true},
      {"--out", "out", "output directory", true},
      {"--algo", "induction.algo", "sequitur | glexis", true},
      {"--k", "induction.k", "k-Sequitur threshold", false},
      {"--l", "induction.l", "top-l macros", false},
      {"--alpha", "agent.alpha", "learning rate", false},
      {"--gamma", "agent.gamma", "discount", false},
      {"--epsilon", "agent.epsilon", "exploration rate", false},
      {"--lambda", "agent.lambda", "trace decay (tdlambda)", false},
      {"--budget", "loop.budget", "training budget", false},
      {"--budget-unit", "loop.budget_unit", "updates | episodes", true},
      {"--warmup", "loop.warmup", "primitive-only updates before the first induction", false},
      {"--grammar-interval", "loop.grammar_interval", "updates between inductions", false},
      {"--expert-source", "loop.expert_source", "optimal | trace:PATH | checkpoint:PATH", true},
      {"--transfer-source", "loop.transfer_source", "grammar dump or hanoi:N", true},
  };
  std::vector<std::string> flag_values(std::size(kRunFlags));
  for (std::size_t i = 0; i < std::size(kRunFlags); ++i) {
    run_cmd->add_option(kRunFlags[i].name, flag_values[i], kRunFlags[i].help);
  }
  bool mask_illegal = false, replay = false, no_intra = false;
  run_cmd->add_flag("--mask-illegal", mask_illegal, "restrict exploration to legal moves");
  run_cmd->add_flag("--replay", replay, "use the grammar replay buffer");
  run_cmd->add_flag("--no-intra-macro", no_intra, "skip intra-macro updates");

  std::string algo = "sequitur", trace_file, text, env_spec;
  int k = 2, l = 5;
  auto* induce_cmd = app.add_subcommand("induce", "infer a grammar from a symbol string");
  induce_cmd->add_option("--algo", algo, "sequitur | glexis");
  induce_cmd->add_option("--k", k, "k-Sequitur threshold");
  induce_cmd->add_option("--l", l, "top-l macros to list");
  induce_cmd->add_option("--trace", trace_file, "file holding one symbol string ('|' separates traces)");
  induce_cmd->add_option("--text", text, "symbol string given inline");
  induce_cmd->add_option("--env", env_spec, "take the alphabet from this environment");

  std::string grammar_file, optimal_file;
  auto* stats_cmd = app.add_subcommand("stats", "compression, entropy and distance stats of a grammar dump");
  stats_cmd->add_option("--grammar", grammar_file, "grammar JSON dump")->required();
  stats_cmd->add_option("--optimal", optimal_file, "reference grammar JSON dump");
  stats_cmd->add_option("--env", env_spec, "use this environment's reference grammar");
  stats_cmd->add_option("--l", l, "top-l productions compared");

  std::string checkpoint;
  int episodes = 1;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  auto* rollout_cmd = app.add_subcommand("rollout", "print traces of a saved agent (or the optimal Hanoi trace)");
  rollout_cmd->add_option("--env", env_spec, "environment")->required();
  rollout_cmd->add_option("--checkpoint", checkpoint, "checkpoint JSON written by run");
  rollout_cmd->add_option("--episodes", episodes, "number of rollouts");
  rollout_cmd->add_option("--epsilon", epsilon, "exploration during rollout");
  rollout_cmd->add_option("--seed", seed, "rng seed");

  bool verbose = false;
  auto* replay_cmd = app.add_subcommand("replay-trace", "step a symbol string through an environment");
  replay_cmd->add_option("--env", env_spec, "environment")->required();
  replay_cmd->add_option("--trace", trace_file, "file holding the symbol string");
  replay_cmd->add_option("--text", text, "symbol string given inline");
  replay_cmd->add_flag("-v,--verbose", verbose, "print every step");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) {
      for (std::size_t i = 0; i < std::size(kRunFlags); ++i) {
        if (run_cmd->count(kRunFlags[i].name) > 0) {
          set_override(run.patch, kRunFlags[i].key, flag_values[i], kRunFlags[i].text);
        }
      }
      if (mask_illegal) set_override(run.patch, "agent.mask_illegal", "true");
      if (replay) set_override(run.patch, "loop.replay", "true");
      if (no_intra) set_override(run.patch, "loop.intra_macro", "false");
      return cmd_run(run);
    }
    if (*induce_cmd) return cmd_induce(algo, k, l, trace_file, text, env_spec);
    if (*stats_cmd) return cmd_stats(grammar_file, optimal_file, env_spec, l);
    if (*rollout_cmd) return cmd_rollout(env_spec, checkpoint, episodes, epsilon, seed);
    if (*replay_cmd) return cmd_replay_trace(env_spec, trace_file, text, verbose);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
