#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace actgram {

/// Grammar symbol. Terminals and non-terminals live in disjoint id spaces;
/// the high bit of the raw value marks a non-terminal.
class Symbol {
 public:
  static constexpr std::uint32_t kNonTerminalBit = 0x80000000u;
  static constexpr std::uint32_t kSeparatorIndex = 0x7fffffffu;

  constexpr Symbol() = default;

  static constexpr Symbol terminal(std::uint32_t index) { return Symbol(index); }
  static constexpr Symbol nonterminal(std::uint32_t index) { return Symbol(index | kNonTerminalBit); }
  /// Trace boundary marker used when several traces are induced together.
  /// It is a terminal that never enters a production body.
  static constexpr Symbol separator() { return Symbol(kSeparatorIndex); }

  constexpr bool is_terminal() const { return (raw_ & kNonTerminalBit) == 0; }
  constexpr bool is_nonterminal() const { return !is_terminal(); }
  constexpr bool is_separator() const { return raw_ == kSeparatorIndex; }
  constexpr std::uint32_t index() const { return raw_ & ~kNonTerminalBit; }
  constexpr std::uint32_t raw() const { return raw_; }

  constexpr auto operator<=>(const Symbol&) const = default;

 private:
  constexpr explicit Symbol(std::uint32_t raw) : raw_(raw) {}
  std::uint32_t raw_ = 0;
};

using SymbolString = std::vector<Symbol>;

/// Side table mapping terminal indices to display tokens (one character each
/// for the built-in environments, e.g. a-f for Towers of Hanoi).
class Alphabet {
 public:
  Alphabet() = default;
  explicit Alphabet(std::vector<std::string> names);

  /// Alphabet of the distinct non-space characters of `text`, sorted.
  static Alphabet from_text(std::string_view text);
  /// The first `n` lowercase letters.
  static Alphabet letters(std::size_t n);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::uint32_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::uint32_t> find(std::string_view name) const;

  /// Parses a compact symbol string ("bafbcd") into terminals. Whitespace is
  /// skipped and '|' becomes the separator. Unknown characters throw ConfigError.
  SymbolString parse(std::string_view text) const;
  /// Display form of a terminal-only string.
  std::string render(const SymbolString& seq) const;

  bool operator==(const Alphabet&) const = default;

 private:
  std::vector<std::string> names_;
};

/// Metadata attached to a trace sampled from an episode rollout.
struct TraceMeta {
  std::uint64_t seed = 0;
  std::uint64_t episode = 0;
  bool success = false;
};

/// Non-empty sequence of terminal action symbols.
class Trace {
 public:
  explicit Trace(SymbolString symbols, TraceMeta meta = {});

  const SymbolString& symbols() const { return symbols_; }
  const TraceMeta& meta() const { return meta_; }
  std::size_t size() const { return symbols_.size(); }

  bool operator==(const Trace& other) const { return symbols_ == other.symbols_; }

 private:
  SymbolString symbols_;
  TraceMeta meta_;
};

/// Joins several traces with the separator symbol.
SymbolString join_traces(const std::vector<Trace>& traces);

/// Number of symbols in `seq` that are not separators.
std::size_t content_length(const SymbolString& seq);

}  // namespace actgram

template <>
struct std::hash<actgram::Symbol> {
  std::size_t operator()(const actgram::Symbol& s) const noexcept { return std::hash<std::uint32_t>{}(s.raw()); }
};
