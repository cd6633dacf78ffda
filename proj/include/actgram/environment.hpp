#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "actgram/symbol.hpp"

namespace actgram {

/// Canonical discrete state id used as the tabular key.
using StateId = std::uint64_t;
/// Index into the agent's action space: primitives first, then macros.
using ActionId = std::uint32_t;

struct StepResult {
  StateId next = 0;
  double reward = 0.0;
  bool done = false;      // episode over (terminal or step limit)
  bool terminal = false;  // true terminal state: bootstrap with zero
  bool success = false;   // goal reached
  bool illegal = false;   // in-band no-op move
};

/// Episodic environment with a finite primitive action set.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual const Alphabet& alphabet() const = 0;
  std::size_t num_actions() const { return alphabet().size(); }

  virtual StateId reset() = 0;
  virtual StepResult step(std::uint32_t action) = 0;
  virtual StateId state() const = 0;
  virtual bool done() const = 0;
  virtual bool is_legal(std::uint32_t action) const = 0;
  virtual std::size_t step_limit() const = 0;
  virtual std::size_t steps() const = 0;
  /// Env steps of an optimal solution when known, otherwise 0.
  virtual std::size_t optimal_steps() const { return 0; }

  virtual std::unique_ptr<Environment> clone() const = 0;
};

/// Parses "hanoi:N" or "grid:PATH" (PATH may be "reference").
std::unique_ptr<Environment> make_environment(const std::string& spec);

}  // namespace actgram
