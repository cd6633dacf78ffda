#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "actgram/environment.hpp"
#include "json.hpp"

namespace actgram {

/// Tabular action values. Unseen (state, action) pairs read as 0.
class QTable {
 public:
  double get(StateId s, ActionId a) const;
  void set(StateId s, ActionId a, double v);
  double& at(StateId s, ActionId a);

  /// max over `actions` of Q(s, .); 0 for an unseen state.
  double max_over(StateId s, std::span<const ActionId> actions) const;

  std::size_t states() const { return rows_.size(); }
  const std::unordered_map<StateId, std::vector<double>>& rows() const { return rows_; }
  void clear() { rows_.clear(); }

  /// Entry-wise exact comparison with missing entries read as 0.
  bool same_values(const QTable& other) const;

  /// {"state:action": value}, non-zero entries only.
  nlohmann::json to_json() const;
  static QTable from_json(const nlohmann::json& j);

 private:
  std::unordered_map<StateId, std::vector<double>> rows_;
};

}  // namespace actgram
