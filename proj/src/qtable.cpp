#include "actgram/qtable.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "actgram/errors.hpp"

namespace actgram {

double QTable::get(StateId s, ActionId a) const {
  auto it = rows_.find(s);
  if (it == rows_.end() || a >= it->second.size()) return 0.0;
  return it->second[a];
}

double& QTable::at(StateId s, ActionId a) {
  auto& row = rows_[s];
  if (a >= row.size()) row.resize(a + 1, 0.0);
  return row[a];
}

void QTable::set(StateId s, ActionId a, double v) { at(s, a) = v; }

double QTable::max_over(StateId s, std::span<const ActionId> actions) const {
  auto it = rows_.find(s);
  if (it == rows_.end() || actions.empty()) return 0.0;
  const auto& row = it->second;
  double best = -std::numeric_limits<double>::infinity();
  for (ActionId a : actions) best = std::max(best, a < row.size() ? row[a] : 0.0);
  return best;
}

bool QTable::same_values(const QTable& other) const {
  auto covers = [](const QTable& x, const QTable& y) {
    for (const auto& [s, row] : x.rows_) {
      for (std::size_t a = 0; a < row.size(); ++a) {
        if (row[a] != y.get(s, static_cast<ActionId>(a))) return false;
      }
    }
    return true;
  };
  return covers(*this, other) && covers(other, *this);
}

nlohmann::json QTable::to_json() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [s, row] : rows_) {
    for (std::size_t a = 0; a < row.size(); ++a) {
      if (row[a] != 0.0) out[std::to_string(s) + ":" + std::to_string(a)] = row[a];
    }
  }
  return out;
}

QTable QTable::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("checkpoint: q must be an object");
  QTable q;
  for (const auto& [key, v] : j.items()) {
    auto colon = key.find(':');
    if (colon == std::string::npos || !v.is_number()) throw ConfigError("checkpoint: bad q entry '" + key + "'");
    try {
      q.set(std::stoull(key.substr(0, colon)), static_cast<ActionId>(std::stoul(key.substr(colon + 1))),
            v.get<double>());
    } catch (const std::logic_error&) {
      throw ConfigError("checkpoint: bad q entry '" + key + "'");
    }
  }
  return q;
}

}  // namespace actgram
