#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "actgram/symbol.hpp"
#include "json.hpp"

namespace actgram {

/// Sequence of primitive action indices.
using ActionSequence = std::vector<std::uint32_t>;

/// A flattened production: a fixed open-loop sequence of primitive actions.
/// Two macros with identical `actions` are the same macro.
struct MacroAction {
  std::uint32_t id = 0;
  ActionSequence actions;
  Symbol origin;

  std::size_t length() const { return actions.size(); }
  bool same_content(const MacroAction& other) const { return actions == other.actions; }
};

/// Straight-line context-free grammar: every non-terminal has exactly one
/// production, bodies have at least two symbols and the production graph is
/// acyclic, so the grammar derives exactly one string.
class Grammar {
 public:
  Grammar() = default;
  /// Validates the straight-line contract; throws StructuralError.
  Grammar(std::size_t num_terminals, std::map<std::uint32_t, SymbolString> productions, SymbolString encoded,
          std::size_t source_length);

  /// Grammar with no productions whose encoding is `seq` itself.
  static Grammar trivial(std::size_t num_terminals, SymbolString seq);

  std::size_t num_terminals() const { return num_terminals_; }
  const std::map<std::uint32_t, SymbolString>& productions() const { return productions_; }
  const SymbolString& encoded() const { return encoded_; }
  std::size_t source_length() const { return source_length_; }
  std::size_t production_count() const { return productions_.size(); }
  bool has_production(Symbol head) const;
  const SymbolString& body(Symbol head) const;

  /// Fully terminal expansion of `seq`. Throws StructuralError on a
  /// non-terminal without a production.
  SymbolString expand(const SymbolString& seq) const;
  SymbolString expand_encoded() const { return expand(encoded_); }

  /// Recursively flattened production of `head` as a macro-action.
  MacroAction flatten(Symbol head) const;
  /// All productions flattened, in head order.
  std::vector<MacroAction> flatten_all() const;

  /// Heads relabeled 0..n-1 in order of first use: first the encoded string
  /// left to right, then the bodies of already labeled heads in label order.
  Grammar canonical() const;

  /// Sum of body lengths plus encoded length (edges of the grammar DAG).
  std::size_t edge_cost() const;

  bool operator==(const Grammar&) const = default;

 private:
  void validate() const;
  const SymbolString& expansion_of(std::uint32_t head, std::map<std::uint32_t, SymbolString>& memo) const;

  std::size_t num_terminals_ = 0;
  std::map<std::uint32_t, SymbolString> productions_;
  SymbolString encoded_;
  std::size_t source_length_ = 0;
};

/// Primitive actions plus the macros currently augmenting them.
struct ActionSet {
  std::size_t num_primitives = 0;
  std::vector<MacroAction> macros;

  std::size_t size() const { return num_primitives + macros.size(); }
  /// Content of action `i` (a singleton for primitives).
  ActionSequence content(std::size_t i) const;
};

/// Union of the primitive action set and `macros`. Macros are deduplicated by
/// content keeping the first; macros shorter than two actions are dropped.
ActionSet augment_action_space(std::size_t num_primitives, std::span<const MacroAction> macros);

/// Display names for non-terminals: uppercase letters not used by the
/// alphabet, then "[Nk]".
std::vector<std::string> nonterminal_names(const Alphabet& alphabet, std::size_t count);

/// Renders a symbol string using terminal names and `nt_names` for heads.
std::string render(const SymbolString& seq, const Alphabet& alphabet, const std::vector<std::string>& nt_names);

/// Grammar dump: {terminals, productions: {head: body}, encoded, source_trace_len}.
/// The grammar is written in canonical form.
nlohmann::json grammar_to_json(const Grammar& grammar, const Alphabet& alphabet);

struct GrammarDump {
  Alphabet alphabet;
  Grammar grammar;
};

/// Inverse of grammar_to_json. Throws ConfigError on malformed input and
/// StructuralError if the productions violate the straight-line contract.
GrammarDump grammar_from_json(const nlohmann::json& j);

}  // namespace actgram
