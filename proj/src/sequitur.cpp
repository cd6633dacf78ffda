#include "actgram/sequitur.hpp"

#include <algorithm>

#include "actgram/errors.hpp"

namespace actgram {

SequiturBuilder::SequiturBuilder(std::size_t num_terminals, int k) : num_terminals_(num_terminals) {
  if (k < 2) throw ConfigError("k: must be >= 2 (got " + std::to_string(k) + ")");
  k_ = static_cast<std::size_t>(k);
  new_rule();  // start rule
}

SequiturBuilder::NodeId SequiturBuilder::new_node(Symbol s) {
  Node n;
  n.sym = s;
  if (s.is_nonterminal()) {
    n.rule = static_cast<RuleId>(s.index());
    ++rules_[n.rule].uses;
  }
  nodes_.push_back(n);
  return static_cast<NodeId>(nodes_.size() - 1);
}

SequiturBuilder::RuleId SequiturBuilder::new_rule() {
  RuleId r = static_cast<RuleId>(rules_.size());
  Node g;
  g.guard = true;
  g.rule = r;
  nodes_.push_back(g);
  NodeId gid = static_cast<NodeId>(nodes_.size() - 1);
  nodes_[gid].prev = gid;
  nodes_[gid].next = gid;
  rules_.push_back(Rule{gid, 0, true});
  return r;
}

void SequiturBuilder::link(NodeId a, NodeId b) {
  nodes_[a].next = b;
  nodes_[b].prev = a;
}

bool SequiturBuilder::is_digram(NodeId i) const {
  const Node& a = nodes_[i];
  if (!a.alive || a.guard) return false;
  const Node& b = nodes_[a.next];
  return !b.guard && !a.sym.is_separator() && !b.sym.is_separator();
}

std::uint64_t SequiturBuilder::key(NodeId i) const {
  return (static_cast<std::uint64_t>(nodes_[i].sym.raw()) << 32) | nodes_[nodes_[i].next].sym.raw();
}

bool SequiturBuilder::recorded(NodeId i) const {
  auto it = index_.find(key(i));
  return it != index_.end() && std::find(it->second.begin(), it->second.end(), i) != it->second.end();
}

bool SequiturBuilder::is_whole_rule(NodeId i) const {
  const Node& p = nodes_[nodes_[i].prev];
  return p.guard && p.rule != 0 && nodes_[nodes_[nodes_[i].next].next].guard;
}

void SequiturBuilder::delete_digram(NodeId i) {
  if (!is_digram(i)) return;
  std::uint64_t d = key(i);
  auto it = index_.find(d);
  if (it == index_.end()) return;
  auto& occ = it->second;
  auto pos = std::find(occ.begin(), occ.end(), i);
  if (pos == occ.end()) return;
  occ.erase(pos);
  // In a run "xxx" only the first of two overlapping digrams is recorded;
  // the neighbour may now need recording.
  if (nodes_[i].sym == nodes_[nodes_[i].next].sym) {
    NodeId p = nodes_[i].prev;
    NodeId n = nodes_[i].next;
    if (is_digram(p) && key(p) == d) recheck_.push_back(p);
    if (is_digram(n) && key(n) == d) recheck_.push_back(n);
  }
}

void SequiturBuilder::remove_node(NodeId i) {
  NodeId p = nodes_[i].prev;
  NodeId n = nodes_[i].next;
  delete_digram(p);
  delete_digram(i);
  link(p, n);
  nodes_[i].alive = false;
  if (nodes_[i].sym.is_nonterminal()) {
    Rule& r = rules_[nodes_[i].rule];
    if (--r.uses < 2) underused_.push_back(nodes_[i].rule);
  }
}

void SequiturBuilder::append(Symbol s) {
  if (s.is_nonterminal()) throw StructuralError("sequitur: input must be terminal");
  if (!s.is_separator() && s.index() >= num_terminals_) throw StructuralError("sequitur: terminal outside alphabet");
  NodeId g = rules_[0].guard;
  NodeId n = new_node(s);
  NodeId tail = nodes_[g].prev;
  link(tail, n);
  link(n, g);
  ++appended_;
  if (tail != g) check(tail);
  drain();
}

bool SequiturBuilder::check(NodeId i) {
  if (!is_digram(i)) return false;
  std::uint64_t d = key(i);
  std::vector<NodeId> occ = index_[d];
  if (std::find(occ.begin(), occ.end(), i) != occ.end()) return false;

  for (NodeId o : occ) {
    if (is_whole_rule(o)) {
      RuleId r = nodes_[nodes_[o].prev].rule;
      substitute(i, r);
      check_rule(r);
      return true;
    }
  }
  for (NodeId o : occ) {
    if (nodes_[o].next == i || nodes_[i].next == o) return true;
  }
  if (!occ.empty() && is_whole_rule(i)) {
    // The new occurrence is itself a rule body: reuse that rule elsewhere.
    RuleId r = nodes_[nodes_[i].prev].rule;
    index_[d] = {i};
    pin(r);
    for (NodeId o : occ) {
      if (is_digram(o) && key(o) == d && o != i) substitute(o, r);
    }
    unpin(r);
    check_rule(r);
    return true;
  }
  index_[d].push_back(i);
  if (index_[d].size() >= k_) {
    make_rule(d);
    return true;
  }
  return false;
}

void SequiturBuilder::substitute(NodeId i, RuleId r) {
  NodeId q = nodes_[i].prev;
  remove_node(i);
  remove_node(nodes_[q].next);
  NodeId n = new_node(Symbol::nonterminal(static_cast<std::uint32_t>(r)));
  NodeId after = nodes_[q].next;
  link(q, n);
  link(n, after);
  if (!check(q)) {
    check(n);
  } else if (nodes_[n].alive) {
    recheck_.push_back(n);
  }
}

void SequiturBuilder::make_rule(std::uint64_t digram) {
  std::vector<NodeId> pending = index_[digram];
  index_[digram].clear();
  Symbol x = nodes_[pending.front()].sym;
  Symbol y = nodes_[nodes_[pending.front()].next].sym;
  RuleId r = new_rule();
  NodeId g = rules_[r].guard;
  NodeId a = new_node(x);
  NodeId b = new_node(y);
  link(g, a);
  link(a, b);
  link(b, g);
  index_[digram] = {a};
  pin(r);
  for (NodeId o : pending) {
    if (o != a && is_digram(o) && key(o) == digram) substitute(o, r);
  }
  unpin(r);
  check_rule(r);
}

// While a rule's occurrences are being replaced, cascades must not see it
// as used once and inline it halfway through.
void SequiturBuilder::pin(RuleId r) { rules_[r].uses += kPinned; }

void SequiturBuilder::unpin(RuleId r) {
  rules_[r].uses -= kPinned;
  if (rules_[r].alive && rules_[r].uses < 2) underused_.push_back(r);
}

void SequiturBuilder::check_rule(RuleId r) {
  if (!rules_[r].alive) return;
  NodeId f = first(r);
  if (nodes_[f].sym.is_nonterminal() && rules_[nodes_[f].rule].uses == 1) expand(f);
  if (!rules_[r].alive) return;
  NodeId l = last(r);
  if (nodes_[l].alive && !nodes_[l].guard && nodes_[l].sym.is_nonterminal() && rules_[nodes_[l].rule].uses == 1) {
    expand(l);
  }
}

void SequiturBuilder::expand(NodeId i) {
  RuleId x = nodes_[i].rule;
  NodeId left = nodes_[i].prev;
  NodeId right = nodes_[i].next;
  NodeId f = first(x);
  NodeId l = last(x);
  delete_digram(left);
  delete_digram(i);
  link(left, f);
  link(l, right);
  nodes_[i].alive = false;
  nodes_[rules_[x].guard].alive = false;
  rules_[x].alive = false;
  rules_[x].uses = 0;
  recheck_.push_back(left);
  recheck_.push_back(l);
}

void SequiturBuilder::remove_rule(RuleId r) {
  NodeId g = rules_[r].guard;
  while (nodes_[g].next != g) remove_node(nodes_[g].next);
  nodes_[g].alive = false;
  rules_[r].alive = false;
}

void SequiturBuilder::drain() {
  while (!recheck_.empty() || !underused_.empty()) {
    if (!underused_.empty()) {
      RuleId r = underused_.back();
      underused_.pop_back();
      if (r == 0 || !rules_[r].alive) continue;
      if (rules_[r].uses == 0) {
        remove_rule(r);
      } else if (rules_[r].uses == 1) {
        for (NodeId i = 0; i < static_cast<NodeId>(nodes_.size()); ++i) {
          const Node& n = nodes_[i];
          if (n.alive && !n.guard && n.sym.is_nonterminal() && n.rule == r) {
            expand(i);
            break;
          }
        }
      }
      continue;
    }
    NodeId n = recheck_.back();
    recheck_.pop_back();
    if (is_digram(n) && !recorded(n)) check(n);
  }
}

Grammar SequiturBuilder::grammar() const {
  std::vector<std::int32_t> relabel(rules_.size(), -1);
  std::uint32_t next = 0;
  for (std::size_t r = 1; r < rules_.size(); ++r) {
    if (rules_[r].alive) relabel[r] = static_cast<std::int32_t>(next++);
  }
  auto body_of = [&](RuleId r) {
    SymbolString out;
    NodeId g = rules_[r].guard;
    for (NodeId i = nodes_[g].next; i != g; i = nodes_[i].next) {
      Symbol s = nodes_[i].sym;
      out.push_back(s.is_nonterminal() ? Symbol::nonterminal(static_cast<std::uint32_t>(relabel[nodes_[i].rule])) : s);
    }
    return out;
  };
  std::map<std::uint32_t, SymbolString> prods;
  for (std::size_t r = 1; r < rules_.size(); ++r) {
    if (rules_[r].alive) prods[static_cast<std::uint32_t>(relabel[r])] = body_of(static_cast<RuleId>(r));
  }
  SymbolString encoded = body_of(0);
  std::size_t separators =
      static_cast<std::size_t>(std::count_if(encoded.begin(), encoded.end(), [](Symbol s) { return s.is_separator(); }));
  std::size_t source = appended_ - separators;
  return Grammar(num_terminals_, std::move(prods), std::move(encoded), source);
}

}  // namespace actgram
