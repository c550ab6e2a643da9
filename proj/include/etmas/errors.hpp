#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace etmas {

/// Invalid dimensions, parameters, or configuration values.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Graph construction failure. `kind` distinguishes the cause.
class TopologyError : public ConfigError {
 public:
  enum class Kind { DimensionMismatch, SelfLoop, NonBinaryEntry, NegativePinning, IsolatedFollower };

  TopologyError(Kind kind, const std::string& what) : ConfigError(what), kind_(kind) {}
  [[nodiscard]] Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A state or model evaluation produced NaN/Inf.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double time, std::size_t agent, std::size_t level)
      : std::runtime_error(what), time_(time), agent_(agent), level_(level) {}

  [[nodiscard]] double time() const noexcept { return time_; }
  [[nodiscard]] std::size_t agent() const noexcept { return agent_; }
  /// 1-based state level, 0 when not level-specific.
  [[nodiscard]] std::size_t level() const noexcept { return level_; }

 private:
  double time_;
  std::size_t agent_;
  std::size_t level_;
};

/// Internal bookkeeping invariant violated (e.g. non-increasing event times).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A diagnostic precondition does not hold (e.g. observer matrix not Hurwitz).
class DiagnosticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace etmas
