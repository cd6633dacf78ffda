#include "actgram/metrics.hpp"

#include <cmath>
#include <limits>
#include <unordered_map>

#include "actgram/induction.hpp"

namespace actgram {

double entropy(const SymbolString& seq) {
  if (seq.empty()) return 0.0;
  std::unordered_map<Symbol, std::size_t> counts;
  for (Symbol s : seq) ++counts[s];
  double n = static_cast<double>(seq.size());
  double h = 0.0;
  for (const auto& [sym, c] : counts) {
    double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<std::size_t> match_distances(const std::vector<ActionSequence>& inferred,
                                         const std::vector<ActionSequence>& optimal) {
  std::vector<std::vector<std::size_t>> d(inferred.size(), std::vector<std::size_t>(optimal.size()));
  for (std::size_t i = 0; i < inferred.size(); ++i) {
    for (std::size_t j = 0; j < optimal.size(); ++j) d[i][j] = levenshtein(inferred[i], optimal[j]);
  }
  std::vector<bool> used_i(inferred.size()), used_j(optimal.size());
  std::vector<std::size_t> out;
  for (std::size_t round = 0; round < std::min(inferred.size(), optimal.size()); ++round) {
    std::size_t bi = 0, bj = 0, best = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < inferred.size(); ++i) {
      if (used_i[i]) continue;
      for (std::size_t j = 0; j < optimal.size(); ++j) {
        if (!used_j[j] && d[i][j] < best) {
          best = d[i][j];
          bi = i;
          bj = j;
        }
      }
    }
    used_i[bi] = used_j[bj] = true;
    out.push_back(best);
  }
  for (std::size_t i = 0; i < inferred.size(); ++i) {
    if (!used_i[i]) out.push_back(inferred[i].size());
  }
  for (std::size_t j = 0; j < optimal.size(); ++j) {
    if (!used_j[j]) out.push_back(optimal[j].size());
  }
  return out;
}

double GrammarStats::median_levenshtein() const {
  std::vector<double> xs(levenshtein.begin(), levenshtein.end());
  return xs.empty() ? 0.0 : median(xs);
}

GrammarStats grammar_stats(const SymbolString& trace, const Grammar& grammar, const Grammar& optimal, int l) {
  GrammarStats st;
  st.compression = compression_ratio(grammar);
  double h_trace = entropy(trace);
  double h_enc = entropy(grammar.encoded());
  st.entropy_ratio = h_trace > 0.0 ? h_enc / h_trace : 1.0;
  auto contents = [l](const Grammar& g) {
    std::vector<ActionSequence> out;
    for (const MacroAction& m : select_top_l(g, l)) out.push_back(m.actions);
    return out;
  };
  st.levenshtein = match_distances(contents(grammar), contents(optimal));
  return st;
}

double percentile(std::vector<double> xs, double p) {
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  double pos = p * static_cast<double>(xs.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, xs.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return xs[lo] + (xs[hi] - xs[lo]) * frac;
}

double median(std::vector<double> xs) { return percentile(std::move(xs), 0.5); }

}  // namespace actgram
