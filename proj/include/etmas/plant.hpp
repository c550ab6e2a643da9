#pragma once

// Follower dynamics in semi-strict-feedback form:
//   x_k' = x_{k+1} + f_k(x_1..x_k) + xi_k(x, t),  k < n
//   x_n' = u       + f_n(x_1..x_n) + xi_n(x, t)
//   y    = x_1

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "etmas/errors.hpp"
#include "etmas/expression.hpp"

namespace etmas {

/// True follower state.
struct AgentPlantState {
  Eigen::VectorXd x;

  [[nodiscard]] double output() const { return x(0); }
};

/// Drift f_k(x). Expression-defined plants are checked at parse time to use
/// only x_1..x_k; built-in models are trusted as written.
using DriftFn = std::function<double(std::span<const double> state)>;
using DisturbanceFn = std::function<double(std::span<const double> state, double t)>;

class PlantDynamics {
 public:
  PlantDynamics() = default;
  PlantDynamics(std::vector<DriftFn> drift, std::vector<DisturbanceFn> disturbance)
      : drift_(std::move(drift)), disturbance_(std::move(disturbance)) {
    if (drift_.empty() || drift_.size() != disturbance_.size()) {
      throw ConfigError("plant needs one drift and one disturbance function per level");
    }
  }

  [[nodiscard]] std::size_t order() const noexcept { return drift_.size(); }

  /// f_k with 1-based level k.
  [[nodiscard]] double drift(std::size_t k, std::span<const double> x) const { return drift_.at(k - 1)(x); }
  [[nodiscard]] double disturbance(std::size_t k, std::span<const double> x, double t) const {
    return disturbance_.at(k - 1)(x, t);
  }

 private:
  std::vector<DriftFn> drift_;
  std::vector<DisturbanceFn> disturbance_;
};

struct ReferenceSignal {
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

inline std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), std::size_t(v.size())}; }

/// Right-hand side of the follower dynamics. Throws DivergenceError (agent
/// index left at 0) carrying the offending level on a non-finite evaluation.
inline Eigen::VectorXd plant_derivative(const PlantDynamics& dyn, const AgentPlantState& state, double u, double t) {
  const std::size_t n = dyn.order();
  if (std::size_t(state.x.size()) != n) throw ConfigError("plant state length does not match plant order");
  const auto x = as_span(state.x);
  Eigen::VectorXd dx(static_cast<Eigen::Index>(n));
  for (std::size_t k = 1; k <= n; ++k) {
    const double f = dyn.drift(k, x);
    const double xi = dyn.disturbance(k, x, t);
    if (!std::isfinite(f) || !std::isfinite(xi)) {
      throw DivergenceError("non-finite plant term at level " + std::to_string(k), t, 0, k);
    }
    const double next = (k < n) ? x[k] : u;
    dx(Eigen::Index(k - 1)) = next + f + xi;
  }
  return dx;
}

/// Two-level benchmark follower:
///   f1 = 0.8 x1 exp(-1.4 x2^2)        xi1 = 0.8 x1 sin(x2) cos^2(t)
///   f2 = -0.5 x1^2 cos(x2)            xi2 = 0.2 x2 cos(x1) cos^2(t)
/// Note f1 reads x2 through its Gaussian factor, so this model is not strictly
/// prefix-dependent at level 1.
inline PlantDynamics benchmark_dynamics() {
  std::vector<DriftFn> f{
      [](std::span<const double> x) { return 0.8 * x[0] * std::exp(-1.4 * x[1] * x[1]); },
      [](std::span<const double> x) { return -0.5 * x[0] * x[0] * std::cos(x[1]); },
  };
  std::vector<DisturbanceFn> xi{
      [](std::span<const double> x, double t) {
        const double c = std::cos(t);
        return 0.8 * x[0] * std::sin(x[1]) * c * c;
      },
      [](std::span<const double> x, double t) {
        const double c = std::cos(t);
        return 0.2 * x[1] * std::cos(x[0]) * c * c;
      },
  };
  return PlantDynamics(std::move(f), std::move(xi));
}

/// y_r = -0.5 sin(4t) cos(2t) with its analytic derivative.
inline ReferenceSignal benchmark_reference() {
  return ReferenceSignal{
      [](double t) { return -0.5 * std::sin(4.0 * t) * std::cos(2.0 * t); },
      [](double t) { return -2.0 * std::cos(4.0 * t) * std::cos(2.0 * t) + std::sin(4.0 * t) * std::sin(2.0 * t); },
  };
}

/// Builds dynamics from expression strings. Drift k may reference x1..xk only.
inline PlantDynamics expression_dynamics(const std::vector<std::string>& drift, const std::vector<std::string>& dist) {
  if (drift.size() != dist.size() || drift.empty()) {
    throw ConfigError("plant.drift and plant.disturbance must be non-empty and of equal length");
  }
  const std::size_t n = drift.size();
  std::vector<DriftFn> f;
  std::vector<DisturbanceFn> xi;
  for (std::size_t k = 1; k <= n; ++k) {
    auto fe = Expression::parse(drift[k - 1]);
    if (fe.max_state_index() > k) {
      throw ConfigError("plant.drift[" + std::to_string(k - 1) + "] references x" +
                        std::to_string(fe.max_state_index()) + "; level " + std::to_string(k) +
                        " drift may only use x1..x" + std::to_string(k));
    }
    if (fe.uses_time()) throw ConfigError("plant.drift[" + std::to_string(k - 1) + "] must not depend on t");
    auto de = Expression::parse(dist[k - 1]);
    if (de.max_state_index() > n) {
      throw ConfigError("plant.disturbance[" + std::to_string(k - 1) + "] references x" +
                        std::to_string(de.max_state_index()) + " beyond the plant order");
    }
    f.emplace_back([fe, k](std::span<const double> x) { return fe(x.first(k), 0.0); });
    xi.emplace_back([de](std::span<const double> s, double t) { return de(s, t); });
  }
  return PlantDynamics(std::move(f), std::move(xi));
}

/// Reference from expressions in t. The derivative is supplied analytically
/// and cross-checked against a central difference on [0, horizon].
inline ReferenceSignal expression_reference(const std::string& value, const std::string& derivative,
                                            double horizon) {
  auto ve = Expression::parse(value);
  auto de = Expression::parse(derivative);
  if (ve.max_state_index() > 0 || de.max_state_index() > 0) {
    throw ConfigError("reference expressions may only depend on t");
  }
  ReferenceSignal ref{
      [ve](double t) { return ve({}, t); },
      [de](double t) { return de({}, t); },
  };
  constexpr int kSamples = 200;
  constexpr double kStep = 1e-5;
  for (int s = 0; s <= kSamples; ++s) {
    const double t = horizon * s / kSamples;
    const double fd = (ref.value(t + kStep) - ref.value(t - kStep)) / (2.0 * kStep);
    const double an = ref.derivative(t);
    if (!std::isfinite(an) || std::abs(an - fd) > 1e-4 * (1.0 + std::abs(fd))) {
      throw ConfigError("reference.derivative disagrees with the finite difference of reference.value at t = " +
                        std::to_string(t));
    }
  }
  return ref;
}

}  // namespace etmas
