#pragma once

#include <stdexcept>
#include <string>

namespace actgram {

/// A grammar violates the straight-line contract (unknown head, cycle, short body).
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or input file; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sampling from a replay buffer that holds no active transition.
class EmptyBufferError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace actgram
