#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "actgram/grammar.hpp"
#include "actgram/symbol.hpp"

namespace actgram {

/// Shannon entropy in bits of the unigram distribution of `seq`. Every
/// distinct symbol (non-terminals included) is one outcome. 0 for empty input.
double entropy(const SymbolString& seq);

/// Unit-cost edit distance.
template <typename Seq>
std::size_t levenshtein(const Seq& x, const Seq& y) {
  std::vector<std::size_t> row(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      std::size_t up = row[j];
      std::size_t sub = diag + (x[i - 1] == y[j - 1] ? 0 : 1);
      row[j] = std::min({up + 1, row[j - 1] + 1, sub});
      diag = up;
    }
  }
  return row[y.size()];
}

/// Greedy nearest pairing: repeatedly take the closest remaining pair (ties by
/// inferred index, then optimal index); leftovers on either side are measured
/// against the empty string. Result has max(|inferred|, |optimal|) entries.
std::vector<std::size_t> match_distances(const std::vector<ActionSequence>& inferred,
                                         const std::vector<ActionSequence>& optimal);

struct GrammarStats {
  double compression = 1.0;
  double entropy_ratio = 1.0;
  std::vector<std::size_t> levenshtein;

  double median_levenshtein() const;
};

/// `trace` is the source of `grammar`; both grammars contribute their top-l
/// flattened productions to the distance list.
GrammarStats grammar_stats(const SymbolString& trace, const Grammar& grammar, const Grammar& optimal, int l);

/// Median with linear interpolation; NaN for an empty list.
double median(std::vector<double> xs);
/// p in [0, 1], linear interpolation between order statistics.
double percentile(std::vector<double> xs, double p);

}  // namespace actgram
