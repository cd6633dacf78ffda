#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "actgram/grammar.hpp"

namespace actgram {

/// Online k-Sequitur. Symbols are appended one at a time; a digram is
/// replaced by a rule once it has `k` non-overlapping occurrences, and any
/// later occurrence of a digram that is a whole rule body is replaced by that
/// rule. Rules referenced only once are inlined. With k = 2 this is classic
/// Sequitur.
class SequiturBuilder {
 public:
  SequiturBuilder(std::size_t num_terminals, int k);

  void append(Symbol s);
  Grammar grammar() const;

 private:
  using NodeId = std::int32_t;
  using RuleId = std::int32_t;

  struct Node {
    Symbol sym;
    NodeId prev = -1;
    NodeId next = -1;
    // Owning rule for a guard, referenced rule for a non-terminal.
    RuleId rule = -1;
    bool guard = false;
    bool alive = true;
  };
  struct Rule {
    NodeId guard = -1;
    std::int32_t uses = 0;
    bool alive = true;
  };

  NodeId new_node(Symbol s);
  RuleId new_rule();
  void link(NodeId a, NodeId b);
  NodeId first(RuleId r) const { return nodes_[rules_[r].guard].next; }
  NodeId last(RuleId r) const { return nodes_[rules_[r].guard].prev; }

  bool is_digram(NodeId i) const;
  std::uint64_t key(NodeId i) const;
  bool recorded(NodeId i) const;
  bool is_whole_rule(NodeId i) const;
  void delete_digram(NodeId i);
  void remove_node(NodeId i);

  bool check(NodeId i);
  void substitute(NodeId i, RuleId r);
  void make_rule(std::uint64_t digram);
  void pin(RuleId r);
  void unpin(RuleId r);
  void check_rule(RuleId r);
  void expand(NodeId i);
  void remove_rule(RuleId r);
  void drain();

  static constexpr std::int32_t kPinned = 1 << 20;

  std::size_t num_terminals_;
  std::size_t k_;
  std::size_t appended_ = 0;
  std::vector<Node> nodes_;
  std::vector<Rule> rules_;
  std::unordered_map<std::uint64_t, std::vector<NodeId>> index_;
  std::vector<NodeId> recheck_;
  std::vector<RuleId> underused_;
};

}  // namespace actgram
