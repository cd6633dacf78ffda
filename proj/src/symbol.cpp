#include "actgram/symbol.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "actgram/errors.hpp"

namespace actgram {

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names)) {
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty() || n == "|") throw ConfigError("alphabet: invalid terminal name '" + n + "'");
    if (!seen.insert(n).second) throw ConfigError("alphabet: duplicate terminal '" + n + "'");
  }
}

Alphabet Alphabet::from_text(std::string_view text) {
  std::set<char> chars;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '|') continue;
    chars.insert(c);
  }
  std::vector<std::string> names;
  for (char c : chars) names.emplace_back(1, c);
  return Alphabet(std::move(names));
}

Alphabet Alphabet::letters(std::size_t n) {
  if (n > 26) throw ConfigError("alphabet: at most 26 letters");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.emplace_back(1, static_cast<char>('a' + i));
  return Alphabet(std::move(names));
}

std::optional<std::uint32_t> Alphabet::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::uint32_t>(it - names_.begin());
}

SymbolString Alphabet::parse(std::string_view text) const {
  SymbolString out;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    if (c == '|') {
      out.push_back(Symbol::separator());
      continue;
    }
    auto idx = find(std::string_view(&c, 1));
    if (!idx) throw ConfigError(std::string("trace: symbol '") + c + "' is not in the alphabet");
    out.push_back(Symbol::terminal(*idx));
  }
  return out;
}

std::string Alphabet::render(const SymbolString& seq) const {
  std::string out;
  for (Symbol s : seq) {
    if (s.is_separator()) {
      out += '|';
    } else if (s.is_terminal()) {
      out += name(s.index());
    } else {
      out += "[" + std::to_string(s.index()) + "]";
    }
  }
  return out;
}

Trace::Trace(SymbolString symbols, TraceMeta meta) : symbols_(std::move(symbols)), meta_(meta) {
  if (symbols_.empty()) throw ConfigError("trace: empty traces are rejected");
  for (Symbol s : symbols_) {
    if (!s.is_terminal() || s.is_separator()) throw StructuralError("trace: only terminal action symbols allowed");
  }
}

SymbolString join_traces(const std::vector<Trace>& traces) {
  SymbolString out;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (i > 0) out.push_back(Symbol::separator());
    out.insert(out.end(), traces[i].symbols().begin(), traces[i].symbols().end());
  }
  return out;
}

std::size_t content_length(const SymbolString& seq) {
  return static_cast<std::size_t>(std::count_if(seq.begin(), seq.end(), [](Symbol s) { return !s.is_separator(); }));
}

}  // namespace actgram
