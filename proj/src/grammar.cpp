#include "actgram/grammar.hpp"

#include <algorithm>
#include <set>

#include "actgram/errors.hpp"

namespace actgram {

namespace {

void check_symbol(Symbol s, std::size_t num_terminals) {
  if (s.is_terminal() && !s.is_separator() && s.index() >= num_terminals) {
    throw StructuralError("grammar: terminal index " + std::to_string(s.index()) + " outside the alphabet");
  }
}

}  // namespace

Grammar::Grammar(std::size_t num_terminals, std::map<std::uint32_t, SymbolString> productions, SymbolString encoded,
                 std::size_t source_length)
    : num_terminals_(num_terminals),
      productions_(std::move(productions)),
      encoded_(std::move(encoded)),
      source_length_(source_length) {
  validate();
}

Grammar Grammar::trivial(std::size_t num_terminals, SymbolString seq) {
  std::size_t n = content_length(seq);
  return Grammar(num_terminals, {}, std::move(seq), n);
}

void Grammar::validate() const {
  for (Symbol s : encoded_) {
    check_symbol(s, num_terminals_);
    if (s.is_nonterminal() && !productions_.contains(s.index())) {
      throw StructuralError("grammar: non-terminal " + std::to_string(s.index()) + " has no production");
    }
  }
  for (const auto& [head, body] : productions_) {
    if (body.size() < 2) throw StructuralError("grammar: production " + std::to_string(head) + " body shorter than 2");
    for (Symbol s : body) {
      check_symbol(s, num_terminals_);
      if (s.is_separator()) throw StructuralError("grammar: separator inside a production body");
      if (s.is_nonterminal() && !productions_.contains(s.index())) {
        throw StructuralError("grammar: non-terminal " + std::to_string(s.index()) + " has no production");
      }
    }
  }
  // Iterative DFS; grey nodes on the stack mark a cycle.
  enum class Mark { kWhite, kGrey, kBlack };
  std::map<std::uint32_t, Mark> mark;
  for (const auto& [head, body] : productions_) mark[head] = Mark::kWhite;
  for (const auto& [root, unused] : productions_) {
    if (mark[root] != Mark::kWhite) continue;
    std::vector<std::pair<std::uint32_t, std::size_t>> stack{{root, 0}};
    mark[root] = Mark::kGrey;
    while (!stack.empty()) {
      auto& [head, pos] = stack.back();
      const SymbolString& body = productions_.at(head);
      if (pos == body.size()) {
        mark[head] = Mark::kBlack;
        stack.pop_back();
        continue;
      }
      Symbol s = body[pos++];
      if (!s.is_nonterminal()) continue;
      Mark& m = mark[s.index()];
      if (m == Mark::kGrey) throw StructuralError("grammar: cyclic production chain through " + std::to_string(s.index()));
      if (m == Mark::kWhite) {
        m = Mark::kGrey;
        stack.emplace_back(s.index(), 0);
      }
    }
  }
}

bool Grammar::has_production(Symbol head) const {
  return head.is_nonterminal() && productions_.contains(head.index());
}

const SymbolString& Grammar::body(Symbol head) const {
  if (!has_production(head)) throw StructuralError("grammar: no production for symbol");
  return productions_.at(head.index());
}

const SymbolString& Grammar::expansion_of(std::uint32_t head, std::map<std::uint32_t, SymbolString>& memo) const {
  if (auto it = memo.find(head); it != memo.end()) return it->second;
  auto pit = productions_.find(head);
  if (pit == productions_.end()) throw StructuralError("grammar: unknown non-terminal " + std::to_string(head));
  SymbolString out;
  for (Symbol s : pit->second) {
    if (s.is_nonterminal()) {
      const SymbolString& sub = expansion_of(s.index(), memo);
      out.insert(out.end(), sub.begin(), sub.end());
    } else {
      out.push_back(s);
    }
  }
  return memo.emplace(head, std::move(out)).first->second;
}

SymbolString Grammar::expand(const SymbolString& seq) const {
  std::map<std::uint32_t, SymbolString> memo;
  SymbolString out;
  out.reserve(seq.size());
  for (Symbol s : seq) {
    if (s.is_nonterminal()) {
      const SymbolString& sub = expansion_of(s.index(), memo);
      out.insert(out.end(), sub.begin(), sub.end());
    } else {
      out.push_back(s);
    }
  }
  return out;
}

MacroAction Grammar::flatten(Symbol head) const {
  if (!has_production(head)) throw StructuralError("flatten: symbol has no production");
  MacroAction macro;
  macro.id = head.index();
  macro.origin = head;
  for (Symbol s : expand({head})) macro.actions.push_back(s.index());
  return macro;
}

std::vector<MacroAction> Grammar::flatten_all() const {
  std::vector<MacroAction> out;
  std::map<std::uint32_t, SymbolString> memo;
  for (const auto& [head, body] : productions_) {
    MacroAction macro;
    macro.id = head;
    macro.origin = Symbol::nonterminal(head);
    for (Symbol s : expansion_of(head, memo)) macro.actions.push_back(s.index());
    out.push_back(std::move(macro));
  }
  return out;
}

Grammar Grammar::canonical() const {
  std::map<std::uint32_t, std::uint32_t> relabel;
  std::vector<std::uint32_t> order;
  auto visit = [&](const SymbolString& seq) {
    for (Symbol s : seq) {
      if (s.is_nonterminal() && !relabel.contains(s.index())) {
        relabel[s.index()] = static_cast<std::uint32_t>(order.size());
        order.push_back(s.index());
      }
    }
  };
  visit(encoded_);
  for (std::size_t i = 0; i < order.size(); ++i) visit(productions_.at(order[i]));
  // Productions unreachable from the encoding keep their relative order.
  for (const auto& [head, body] : productions_) {
    if (!relabel.contains(head)) {
      relabel[head] = static_cast<std::uint32_t>(order.size());
      order.push_back(head);
      visit(body);
    }
  }
  auto map_seq = [&](const SymbolString& seq) {
    SymbolString out;
    out.reserve(seq.size());
    for (Symbol s : seq) out.push_back(s.is_nonterminal() ? Symbol::nonterminal(relabel.at(s.index())) : s);
    return out;
  };
  std::map<std::uint32_t, SymbolString> prods;
  for (const auto& [head, body] : productions_) prods[relabel.at(head)] = map_seq(body);
  return Grammar(num_terminals_, std::move(prods), map_seq(encoded_), source_length_);
}

std::size_t Grammar::edge_cost() const {
  std::size_t cost = content_length(encoded_);
  for (const auto& [head, body] : productions_) cost += body.size();
  return cost;
}

ActionSequence ActionSet::content(std::size_t i) const {
  if (i < num_primitives) return {static_cast<std::uint32_t>(i)};
  return macros.at(i - num_primitives).actions;
}

ActionSet augment_action_space(std::size_t num_primitives, std::span<const MacroAction> macros) {
  ActionSet out;
  out.num_primitives = num_primitives;
  for (const MacroAction& m : macros) {
    if (m.actions.size() < 2) continue;
    bool dup = std::any_of(out.macros.begin(), out.macros.end(), [&](const MacroAction& o) { return o.same_content(m); });
    if (!dup) out.macros.push_back(m);
  }
  return out;
}

std::vector<std::string> nonterminal_names(const Alphabet& alphabet, std::size_t count) {
  std::vector<std::string> names;
  for (char c = 'A'; c <= 'Z' && names.size() < count; ++c) {
    std::string n(1, c);
    if (!alphabet.find(n)) names.push_back(n);
  }
  while (names.size() < count) names.push_back("[N" + std::to_string(names.size()) + "]");
  return names;
}

std::string render(const SymbolString& seq, const Alphabet& alphabet, const std::vector<std::string>& nt_names) {
  std::string out;
  for (Symbol s : seq) {
    if (s.is_separator()) {
      out += '|';
    } else if (s.is_terminal()) {
      const std::string& n = alphabet.name(s.index());
      out += n.size() == 1 ? n : "[" + n + "]";
    } else {
      out += nt_names.at(s.index());
    }
  }
  return out;
}

nlohmann::json grammar_to_json(const Grammar& grammar, const Alphabet& alphabet) {
  Grammar g = grammar.canonical();
  auto names = nonterminal_names(alphabet, g.production_count());
  nlohmann::json prods = nlohmann::json::object();
  for (const auto& [head, body] : g.productions()) prods[names.at(head)] = render(body, alphabet, names);
  nlohmann::json j;
  j["terminals"] = alphabet.names();
  j["productions"] = prods;
  j["encoded"] = render(g.encoded(), alphabet, names);
  j["source_trace_len"] = g.source_length();
  return j;
}

namespace {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '[') {
      auto close = text.find(']', i);
      if (close == std::string::npos) throw ConfigError("grammar dump: unterminated '[' in \"" + text + "\"");
      out.push_back(text.substr(i + 1, close - i - 1));
      i = close;
    } else {
      out.emplace_back(1, text[i]);
    }
  }
  return out;
}

}  // namespace

GrammarDump grammar_from_json(const nlohmann::json& j) {
  for (const char* key : {"terminals", "productions", "encoded"}) {
    if (!j.contains(key)) throw ConfigError(std::string("grammar dump: missing field '") + key + "'");
  }
  Alphabet alphabet(j.at("terminals").get<std::vector<std::string>>());
  auto head_key = [](const std::string& name) {
    if (name.size() > 2 && name.front() == '[' && name.back() == ']') return name.substr(1, name.size() - 2);
    return name;
  };
  std::map<std::string, std::uint32_t> heads;
  std::uint32_t next = 0;
  for (const auto& [name, body] : j.at("productions").items()) heads[head_key(name)] = next++;
  auto parse = [&](const std::string& text) {
    SymbolString out;
    for (const std::string& tok : tokenize(text)) {
      if (tok == "|") {
        out.push_back(Symbol::separator());
      } else if (auto h = heads.find(tok); h != heads.end()) {
        out.push_back(Symbol::nonterminal(h->second));
      } else if (auto t = alphabet.find(tok)) {
        out.push_back(Symbol::terminal(*t));
      } else {
        throw ConfigError("grammar dump: unknown symbol '" + tok + "'");
      }
    }
    return out;
  };
  std::map<std::uint32_t, SymbolString> prods;
  for (const auto& [name, body] : j.at("productions").items()) {
    prods[heads.at(head_key(name))] = parse(body.get<std::string>());
  }
  SymbolString encoded = parse(j.at("encoded").get<std::string>());
  Grammar probe(alphabet.size(), prods, encoded, 0);
  std::size_t len = j.contains("source_trace_len") ? j.at("source_trace_len").get<std::size_t>()
                                                   : content_length(probe.expand_encoded());
  return {alphabet, Grammar(alphabet.size(), std::move(prods), std::move(encoded), len)};
}

}  // namespace actgram
