#include "actgram/run_log.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "actgram/metrics.hpp"

namespace actgram {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

std::string seed_stem(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

std::string join(const std::vector<std::string>& xs, char sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += sep;
    out += xs[i];
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_seed_csv(const SeedLog& log, std::ostream& out) {
  out << "episode,env_steps,decision_steps,return,steps_to_goal,active_macros,k\n";
  for (const EpisodeRow& r : log.episodes) {
    out << r.episode << ',' << r.env_steps << ',' << r.decision_steps << ',' << format_number(r.ret) << ','
        << r.steps_to_goal << ',' << r.active_macros << ',' << r.k << '\n';
  }
}

void write_inductions_csv(const SeedLog& log, std::ostream& out) {
  out << "index,episode,updates,k,skipped,productions,compression,entropy_ratio,levenshtein,macros\n";
  for (const InductionRecord& r : log.inductions) {
    std::vector<std::string> dist;
    for (std::size_t d : r.levenshtein) dist.push_back(std::to_string(d));
    out << r.index << ',' << r.episode << ',' << r.updates << ',' << r.k << ',' << (r.skipped ? 1 : 0) << ','
        << r.productions << ',' << format_number(r.compression) << ',' << format_number(r.entropy_ratio) << ','
        << join(dist, ' ') << ',' << join(r.macros, ' ') << '\n';
  }
}

std::vector<AggregateRow> aggregate(const std::vector<SeedLog>& seeds) {
  std::map<long, std::vector<const EpisodeRow*>> by_episode;
  for (const SeedLog& s : seeds) {
    for (const EpisodeRow& r : s.episodes) by_episode[r.episode].push_back(&r);
  }
  std::vector<AggregateRow> out;
  for (const auto& [ep, rows] : by_episode) {
    AggregateRow a;
    a.episode = ep;
    a.seeds = rows.size();
    std::vector<double> ret, env, dec;
    double solved = 0;
    for (const EpisodeRow* r : rows) {
      ret.push_back(r->ret);
      env.push_back(static_cast<double>(r->env_steps));
      dec.push_back(static_cast<double>(r->decision_steps));
      if (r->steps_to_goal >= 0) solved += 1;
    }
    a.return_median = percentile(ret, 0.5);
    a.return_p10 = percentile(ret, 0.1);
    a.return_p90 = percentile(ret, 0.9);
    a.env_steps_median = percentile(env, 0.5);
    a.env_steps_p10 = percentile(env, 0.1);
    a.env_steps_p90 = percentile(env, 0.9);
    a.decision_steps_median = percentile(dec, 0.5);
    a.decision_steps_p10 = percentile(dec, 0.1);
    a.decision_steps_p90 = percentile(dec, 0.9);
    a.solved_fraction = solved / static_cast<double>(rows.size());
    out.push_back(a);
  }
  return out;
}

void write_aggregate_csv(const std::vector<AggregateRow>& rows, std::ostream& out) {
  out << "episode,seeds,return_median,return_p10,return_p90,env_steps_median,env_steps_p10,env_steps_p90,"
         "decision_steps_median,decision_steps_p10,decision_steps_p90,solved_fraction\n";
  for (const AggregateRow& a : rows) {
    out << a.episode << ',' << a.seeds;
    for (double v : {a.return_median, a.return_p10, a.return_p90, a.env_steps_median, a.env_steps_p10,
                     a.env_steps_p90, a.decision_steps_median, a.decision_steps_p10, a.decision_steps_p90,
                     a.solved_fraction}) {
      out << ',' << format_number(v);
    }
    out << '\n';
  }
}

void emit_seed(const SeedLog& log, const fs::path& dir) {
  fs::create_directories(dir / "grammars");
  fs::create_directories(dir / "checkpoints");
  std::string stem = seed_stem(log.seed);
  {
    auto out = open_out(dir / (stem + ".csv"));
    write_seed_csv(log, out);
  }
  {
    auto out = open_out(dir / (stem + "_inductions.csv"));
    write_inductions_csv(log, out);
  }
  for (const InductionRecord& r : log.inductions) {
    if (r.skipped) continue;
    auto out = open_out(dir / "grammars" / (stem + "_induction_" + std::to_string(r.index) + ".json"));
    out << r.grammar.dump(2) << '\n';
  }
  if (!log.checkpoint.is_null()) {
    auto out = open_out(dir / "checkpoints" / (stem + ".json"));
    out << log.checkpoint.dump() << '\n';
  }
}

void emit_run_log(const RunLog& log, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create '" + dir.string() + "': " + ec.message());
  {
    auto out = open_out(dir / "config.json");
    out << to_json(log.config).dump(2) << '\n';
  }
  for (const SeedLog& s : log.seeds) emit_seed(s, dir);
  auto out = open_out(dir / "aggregate.csv");
  write_aggregate_csv(aggregate(log.seeds), out);
}

}  // namespace actgram
