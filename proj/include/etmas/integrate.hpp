#pragma once

// Classical fixed-step fourth-order Runge-Kutta.

#include <concepts>
#include <type_traits>

namespace etmas {

/// State must support `State + State` and `double * State`.
template <typename State, typename Rhs>
  requires std::invocable<Rhs&, const State&, double>
State rk4_step(Rhs& rhs, const State& x, double t, double dt) {
  const State k1 = rhs(x, t);
  const State k2 = rhs(State(x + (0.5 * dt) * k1), t + 0.5 * dt);
  const State k3 = rhs(State(x + (0.5 * dt) * k2), t + 0.5 * dt);
  const State k4 = rhs(State(x + dt * k3), t + dt);
  return State(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
}

/// Advances `steps` steps of size dt starting at t0. The state type is the
/// right-hand side's return type, so Eigen expressions may be passed as x0.
template <typename X0, typename Rhs>
auto rk4_integrate(Rhs& rhs, const X0& x0, double t0, double dt, long steps) {
  using State = std::decay_t<decltype(rhs(x0, t0))>;
  State x = x0;
  for (long k = 0; k < steps; ++k) x = rk4_step(rhs, x, t0 + double(k) * dt, dt);
  return x;
}

}  // namespace etmas
