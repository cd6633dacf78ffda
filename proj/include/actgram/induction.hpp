#pragma once

#include <optional>
#include <string>
#include <vector>

#include "actgram/grammar.hpp"
#include "actgram/symbol.hpp"

namespace actgram {

enum class InductionAlgorithm { kSequitur, kGLexis };

std::string to_string(InductionAlgorithm a);
InductionAlgorithm induction_algorithm_from_string(const std::string& s);

struct InductionConfig {
  InductionAlgorithm algorithm = InductionAlgorithm::kSequitur;
  int k = 2;  // k-Sequitur digram threshold, >= 2
  int l = 1;  // top-l productions handed to the agent, >= 1

  void validate() const;
  bool operator==(const InductionConfig&) const = default;
};

/// k-Sequitur over `seq` (separators allowed, never inside a rule).
/// Sequences shorter than two symbols give the trivial grammar.
Grammar sequitur_infer(const SymbolString& seq, std::size_t num_terminals, int k);
Grammar sequitur_infer(const Trace& trace, std::size_t num_terminals, int k);

/// Greedy Lexis-DAG construction with edge-count cost.
class GLexisBuilder {
 public:
  struct Candidate {
    SymbolString content;
    std::size_t occurrences = 0;
    long saving = 0;
    // Set when `content` is already the whole body of this node.
    std::optional<std::uint32_t> reuse;
  };

  GLexisBuilder(std::vector<SymbolString> targets, std::size_t num_terminals);

  /// Repeated substring (length >= 2, >= 2 non-overlapping occurrences over
  /// all node strings) with maximal edge-cost saving; ties go to the longer
  /// substring, then the lexicographically smaller one.
  std::optional<Candidate> best_candidate() const;
  /// Applies the best candidate if it strictly reduces the cost.
  bool step();
  void run();

  std::size_t cost() const;
  Grammar grammar() const;

 private:
  void apply(const Candidate& c);

  std::size_t num_terminals_;
  std::vector<SymbolString> targets_;
  std::vector<SymbolString> bodies_;
};

Grammar glexis_infer(const std::vector<Trace>& traces, std::size_t num_terminals);

/// Single entry point used by the experiment loop. Sequitur joins several
/// traces with the separator symbol.
Grammar induce(const std::vector<Trace>& traces, std::size_t num_terminals, const InductionConfig& cfg);

/// |trace| / |encoded| (separators excluded).
double compression_ratio(const Grammar& grammar);

/// Flattens every production, ranks by occurrences of its head in the final
/// encoded string (ties: longer flattened macro, then lexicographic actions),
/// drops content duplicates and keeps the first `l`.
std::vector<MacroAction> select_top_l(const Grammar& grammar, int l);

}  // namespace actgram
