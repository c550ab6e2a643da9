#pragma once

// Event-triggered controller updates with a zero-order hold.
//
// The actuator holds u = w(t_s) until the measurement error
// theta = w - u crosses the active threshold:
//   fixed     |theta| >= pi
//   relative  |theta| >= delta |u| + pi_star
//   switch    relative test when |u| >= gate, fixed test otherwise
//   periodic  t - t_s >= period

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "etmas/errors.hpp"

namespace etmas {

enum class Strategy { Fixed, Relative, Switch, Periodic };
enum class Branch { Fixed, Relative, Periodic };

/// Candidate law used by the switch strategy.
enum class SwitchCandidate { Fixed, Relative, Branch };

inline constexpr std::string_view kStrategyNames = "fixed, relative, switch, periodic";

inline std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Fixed: return "fixed";
    case Strategy::Relative: return "relative";
    case Strategy::Switch: return "switch";
    case Strategy::Periodic: return "periodic";
  }
  return "?";
}

inline std::string_view to_string(Branch b) {
  switch (b) {
    case Branch::Fixed: return "fixed";
    case Branch::Relative: return "relative";
    case Branch::Periodic: return "periodic";
  }
  return "?";
}

inline std::string_view to_string(SwitchCandidate c) {
  switch (c) {
    case SwitchCandidate::Fixed: return "fixed";
    case SwitchCandidate::Relative: return "relative";
    case SwitchCandidate::Branch: return "branch";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  if (name == "fixed") return Strategy::Fixed;
  if (name == "relative") return Strategy::Relative;
  if (name == "switch") return Strategy::Switch;
  if (name == "periodic") return Strategy::Periodic;
  throw ConfigError("unknown strategy \"" + std::string(name) + "\" (valid: " + std::string(kStrategyNames) + ")");
}

inline SwitchCandidate parse_switch_candidate(std::string_view name) {
  if (name == "fixed") return SwitchCandidate::Fixed;
  if (name == "relative") return SwitchCandidate::Relative;
  if (name == "branch") return SwitchCandidate::Branch;
  throw ConfigError("unknown switch candidate \"" + std::string(name) + "\" (valid: fixed, relative, branch)");
}

struct TriggerConfig {
  Strategy strategy = Strategy::Fixed;
  double pi = 2.5;
  double pi_bar = 4.0;
  double mu = 5.4;
  double delta = 0.245;
  double pi_star = 2.0;
  double pi_bar_star = 4.0;
  double gate = 6.0;
  double period = 1e-3;
  SwitchCandidate switch_candidate = SwitchCandidate::Fixed;

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string("trigger.") + name + " must be positive");
    };
    positive(pi, "pi");
    positive(pi_bar, "pi_bar");
    positive(mu, "mu");
    positive(pi_star, "pi_star");
    positive(pi_bar_star, "pi_bar_star");
    positive(gate, "gate");
    positive(period, "period");
    if (!(pi_bar > pi)) throw ConfigError("trigger.pi_bar must exceed trigger.pi (π̄ > π)");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("trigger.delta must lie in (0, 1) (0 < Δ < 1)");
    if (!(pi_bar_star > pi_star / (1.0 - delta))) {
      throw ConfigError("trigger.pi_bar_star must exceed pi_star / (1 - delta) (π̄* > π*/(1−Δ))");
    }
  }

  /// Smallest threshold the strategy can apply; used for the inter-event bound.
  [[nodiscard]] double min_threshold() const {
    switch (strategy) {
      case Strategy::Fixed: return pi;
      case Strategy::Relative: return pi_star;
      case Strategy::Switch: return std::min(pi, pi_star);
      case Strategy::Periodic: return 0.0;
    }
    return 0.0;
  }
};

struct Event {
  double time = 0.0;
  Branch branch = Branch::Fixed;
  double u = 0.0;
};

struct TriggerState {
  double u_applied = 0.0;
  double w_current = 0.0;
  std::optional<double> last_event_time;
  std::size_t event_count_fixed_branch = 0;
  std::size_t event_count_relative_branch = 0;
  std::size_t event_count_periodic = 0;
  std::vector<Event> event_log;

  [[nodiscard]] std::size_t event_count() const noexcept { return event_log.size(); }
  /// measurement error w - u for the most recent candidate
  [[nodiscard]] double theta() const noexcept { return w_current - u_applied; }
};

/// w = alpha_{n+1} - pi_bar tanh(z_n pi_bar / mu)
inline double candidate_fixed(const TriggerConfig& cfg, double alpha_final, double z_n) {
  return alpha_final - cfg.pi_bar * std::tanh(z_n * cfg.pi_bar / cfg.mu);
}

/// w = -(1 + delta) (alpha tanh(z_n alpha / mu) + pi_bar* tanh(z_n pi_bar* / mu))
inline double candidate_relative(const TriggerConfig& cfg, double alpha_final, double z_n) {
  return -(1.0 + cfg.delta) * (alpha_final * std::tanh(z_n * alpha_final / cfg.mu) +
                               cfg.pi_bar_star * std::tanh(z_n * cfg.pi_bar_star / cfg.mu));
}

/// Branch whose test governs the next decision given the held control.
inline Branch active_branch(const TriggerConfig& cfg, double u_applied) {
  switch (cfg.strategy) {
    case Strategy::Fixed: return Branch::Fixed;
    case Strategy::Relative: return Branch::Relative;
    case Strategy::Switch: return std::abs(u_applied) >= cfg.gate ? Branch::Relative : Branch::Fixed;
    case Strategy::Periodic: return Branch::Periodic;
  }
  return Branch::Fixed;
}

/// Candidate control for the configured strategy. The periodic baseline uses
/// the fixed-threshold law.
inline double candidate(const TriggerConfig& cfg, double alpha_final, double z_n, double u_applied) {
  switch (cfg.strategy) {
    case Strategy::Fixed:
    case Strategy::Periodic: return candidate_fixed(cfg, alpha_final, z_n);
    case Strategy::Relative: return candidate_relative(cfg, alpha_final, z_n);
    case Strategy::Switch:
      switch (cfg.switch_candidate) {
        case SwitchCandidate::Fixed: return candidate_fixed(cfg, alpha_final, z_n);
        case SwitchCandidate::Relative: return candidate_relative(cfg, alpha_final, z_n);
        case SwitchCandidate::Branch:
          return active_branch(cfg, u_applied) == Branch::Relative ? candidate_relative(cfg, alpha_final, z_n)
                                                                   : candidate_fixed(cfg, alpha_final, z_n);
      }
  }
  return 0.0;
}

/// Threshold on |w - u| for the threshold branches.
inline double branch_threshold(const TriggerConfig& cfg, Branch b, double u_applied) {
  switch (b) {
    case Branch::Fixed: return cfg.pi;
    case Branch::Relative: return cfg.delta * std::abs(u_applied) + cfg.pi_star;
    case Branch::Periodic: return 0.0;
  }
  return 0.0;
}

/// Decision for candidate `w_now` at sample time `t` on a grid of step `dt`.
/// The first call (no event yet) always fires so that u is defined from t = 0.
inline std::optional<Branch> should_fire(const TriggerConfig& cfg, const TriggerState& state, double w_now, double t,
                                         double dt) {
  const Branch b = active_branch(cfg, state.u_applied);
  if (!state.last_event_time) return b;
  if (b == Branch::Periodic) {
    if (t - *state.last_event_time >= cfg.period - 0.5 * dt) return b;
    return std::nullopt;
  }
  if (std::abs(w_now - state.u_applied) >= branch_threshold(cfg, b, state.u_applied)) return b;
  return std::nullopt;
}

inline void apply_event(TriggerState& state, double w_now, double t, Branch branch) {
  if (state.last_event_time && !(t > *state.last_event_time)) {
    throw ConsistencyError("event time " + std::to_string(t) + " does not follow previous event at " +
                           std::to_string(*state.last_event_time));
  }
  state.u_applied = w_now;
  state.w_current = w_now;
  state.last_event_time = t;
  switch (branch) {
    case Branch::Fixed: ++state.event_count_fixed_branch; break;
    case Branch::Relative: ++state.event_count_relative_branch; break;
    case Branch::Periodic: ++state.event_count_periodic; break;
  }
  state.event_log.push_back({t, branch, w_now});
}

}  // namespace etmas
