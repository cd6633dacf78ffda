#include <algorithm>
#include <map>

#include "actgram/errors.hpp"
#include "actgram/induction.hpp"

namespace actgram {

namespace {

struct Pos {
  std::uint32_t str;
  std::uint32_t off;
};

bool better(const GLexisBuilder::Candidate& a, const GLexisBuilder::Candidate& b) {
  if (a.saving != b.saving) return a.saving > b.saving;
  if (a.content.size() != b.content.size()) return a.content.size() > b.content.size();
  return a.content < b.content;
}

// Greedy left-to-right replacement of non-overlapping occurrences.
SymbolString replace_all(const SymbolString& s, const SymbolString& pattern, Symbol with) {
  SymbolString out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (i + pattern.size() <= s.size() && std::equal(pattern.begin(), pattern.end(), s.begin() + static_cast<long>(i))) {
      out.push_back(with);
      i += pattern.size();
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

}  // namespace

GLexisBuilder::GLexisBuilder(std::vector<SymbolString> targets, std::size_t num_terminals)
    : num_terminals_(num_terminals), targets_(std::move(targets)) {
  if (targets_.empty()) throw ConfigError("glexis: at least one trace required");
  for (const auto& t : targets_) {
    if (t.empty()) throw ConfigError("glexis: empty trace");
    for (Symbol s : t) {
      if (!s.is_terminal() || s.is_separator() || s.index() >= num_terminals_) {
        throw StructuralError("glexis: traces must hold alphabet terminals only");
      }
    }
  }
}

std::optional<GLexisBuilder::Candidate> GLexisBuilder::best_candidate() const {
  std::vector<const SymbolString*> strings;
  for (const auto& t : targets_) strings.push_back(&t);
  for (const auto& b : bodies_) strings.push_back(&b);
  std::size_t num_targets = targets_.size();

  // Depth-first refinement of position groups sharing a common prefix,
  // i.e. a walk over the suffix tree restricted to repeated substrings.
  std::map<Symbol, std::vector<Pos>> roots;
  for (std::uint32_t si = 0; si < strings.size(); ++si) {
    for (std::uint32_t off = 0; off < strings[si]->size(); ++off) roots[(*strings[si])[off]].push_back({si, off});
  }
  std::vector<std::pair<std::size_t, std::vector<Pos>>> stack;
  for (auto& [sym, group] : roots) {
    if (group.size() >= 2) stack.emplace_back(1, std::move(group));
  }

  std::optional<Candidate> best;
  while (!stack.empty()) {
    auto [len, group] = std::move(stack.back());
    stack.pop_back();
    std::map<Symbol, std::vector<Pos>> ext;
    for (const Pos& p : group) {
      const SymbolString& s = *strings[p.str];
      if (p.off + len < s.size()) ext[s[p.off + len]].push_back(p);
    }
    for (auto& [sym, sub] : ext) {
      if (sub.size() < 2) continue;
      std::size_t L = len + 1;
      std::size_t count = 0;
      std::optional<std::uint32_t> whole;
      std::uint32_t cur_str = UINT32_MAX;
      std::size_t last_end = 0;
      for (const Pos& p : sub) {
        if (p.str != cur_str) {
          cur_str = p.str;
          last_end = 0;
        }
        if (p.off < last_end) continue;
        ++count;
        last_end = p.off + L;
        if (p.str >= num_targets && p.off == 0 && strings[p.str]->size() == L) {
          whole = static_cast<std::uint32_t>(p.str - num_targets);
        }
      }
      if (count >= 2) {
        Candidate c;
        const SymbolString& s = *strings[sub.front().str];
        c.content.assign(s.begin() + sub.front().off, s.begin() + sub.front().off + static_cast<long>(L));
        c.occurrences = count;
        long n = static_cast<long>(count);
        long l = static_cast<long>(L);
        if (whole) {
          c.reuse = whole;
          c.saving = (n - 1) * (l - 1);
        } else {
          c.saving = n * (l - 1) - l;
        }
        if (!best || better(c, *best)) best = std::move(c);
      }
      stack.emplace_back(L, std::move(sub));
    }
  }
  return best;
}

void GLexisBuilder::apply(const Candidate& c) {
  std::uint32_t head = c.reuse ? *c.reuse : static_cast<std::uint32_t>(bodies_.size());
  Symbol nt = Symbol::nonterminal(head);
  for (auto& t : targets_) t = replace_all(t, c.content, nt);
  for (std::size_t i = 0; i < bodies_.size(); ++i) {
    if (c.reuse && i == *c.reuse) continue;
    bodies_[i] = replace_all(bodies_[i], c.content, nt);
  }
  if (!c.reuse) bodies_.push_back(c.content);
}

bool GLexisBuilder::step() {
  auto c = best_candidate();
  if (!c || c->saving <= 0) return false;
  apply(*c);
  return true;
}

void GLexisBuilder::run() {
  while (step()) {
  }
}

std::size_t GLexisBuilder::cost() const {
  std::size_t cost = 0;
  for (const auto& t : targets_) cost += t.size();
  for (const auto& b : bodies_) cost += b.size();
  return cost;
}

Grammar GLexisBuilder::grammar() const {
  SymbolString encoded;
  std::size_t source = 0;
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    if (i > 0) encoded.push_back(Symbol::separator());
    encoded.insert(encoded.end(), targets_[i].begin(), targets_[i].end());
  }
  std::map<std::uint32_t, SymbolString> prods;
  for (std::size_t i = 0; i < bodies_.size(); ++i) prods[static_cast<std::uint32_t>(i)] = bodies_[i];
  Grammar probe(num_terminals_, prods, encoded, 0);
  source = content_length(probe.expand_encoded());
  return Grammar(num_terminals_, std::move(prods), std::move(encoded), source);
}

Grammar glexis_infer(const std::vector<Trace>& traces, std::size_t num_terminals) {
  std::vector<SymbolString> targets;
  for (const auto& t : traces) targets.push_back(t.symbols());
  GLexisBuilder builder(std::move(targets), num_terminals);
  builder.run();
  return builder.grammar();
}

}  // namespace actgram
