#include "actgram/induction.hpp"

#include <algorithm>

#include "actgram/errors.hpp"
#include "actgram/sequitur.hpp"

namespace actgram {

std::string to_string(InductionAlgorithm a) { return a == InductionAlgorithm::kSequitur ? "sequitur" : "glexis"; }

InductionAlgorithm induction_algorithm_from_string(const std::string& s) {
  if (s == "sequitur") return InductionAlgorithm::kSequitur;
  if (s == "glexis") return InductionAlgorithm::kGLexis;
  throw ConfigError("algo: expected 'sequitur' or 'glexis', got '" + s + "'");
}

void InductionConfig::validate() const {
  if (k < 2) throw ConfigError("k: must be >= 2 (got " + std::to_string(k) + ")");
  if (l < 1) throw ConfigError("l: must be >= 1 (got " + std::to_string(l) + ")");
}

Grammar sequitur_infer(const SymbolString& seq, std::size_t num_terminals, int k) {
  if (k < 2) throw ConfigError("k: must be >= 2 (got " + std::to_string(k) + ")");
  if (seq.size() < 2) return Grammar::trivial(num_terminals, seq);
  SequiturBuilder builder(num_terminals, k);
  for (Symbol s : seq) builder.append(s);
  return builder.grammar();
}

Grammar sequitur_infer(const Trace& trace, std::size_t num_terminals, int k) {
  return sequitur_infer(trace.symbols(), num_terminals, k);
}

Grammar induce(const std::vector<Trace>& traces, std::size_t num_terminals, const InductionConfig& cfg) {
  cfg.validate();
  if (traces.empty()) throw ConfigError("induce: no traces");
  if (cfg.algorithm == InductionAlgorithm::kGLexis) return glexis_infer(traces, num_terminals);
  return sequitur_infer(join_traces(traces), num_terminals, cfg.k);
}

double compression_ratio(const Grammar& grammar) {
  std::size_t enc = content_length(grammar.encoded());
  if (enc == 0) return 1.0;
  return static_cast<double>(grammar.source_length()) / static_cast<double>(enc);
}

std::vector<MacroAction> select_top_l(const Grammar& grammar, int l) {
  if (l < 1) throw ConfigError("l: must be >= 1 (got " + std::to_string(l) + ")");
  struct Ranked {
    std::size_t count;
    MacroAction macro;
  };
  std::vector<Ranked> ranked;
  for (MacroAction& m : grammar.flatten_all()) {
    auto count = static_cast<std::size_t>(std::count(grammar.encoded().begin(), grammar.encoded().end(), m.origin));
    ranked.push_back({count, std::move(m)});
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.macro.length() != b.macro.length()) return a.macro.length() > b.macro.length();
    return a.macro.actions < b.macro.actions;
  });
  std::vector<MacroAction> out;
  for (Ranked& r : ranked) {
    if (out.size() == static_cast<std::size_t>(l)) break;
    bool dup = std::any_of(out.begin(), out.end(), [&](const MacroAction& m) { return m.same_content(r.macro); });
    if (!dup) out.push_back(std::move(r.macro));
  }
  return out;
}

}  // namespace actgram
