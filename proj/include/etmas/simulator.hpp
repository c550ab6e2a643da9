#pragma once

// Closed-loop simulation of the leader-follower network: plants, observers,
// adaptive weights, dynamic-surface filters and Theta estimates integrated as
// one ODE with RK4, with the control held between trigger decisions.
//
// Every follower fires once at t = 0 to define u. Then, per step k = 1..K
// (t_k = k dt, K = T_end / dt):
//   1. advance the state from t_{k-1} to t_k with u held,
//   2. evaluate controller signals and candidates w_i at the new state,
//   3. run the trigger test and update the held u_i on a fire,
//   4. record the sample.
// The periodic baseline therefore issues exactly K updates after t = 0.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "etmas/controller.hpp"
#include "etmas/errors.hpp"
#include "etmas/graph.hpp"
#include "etmas/integrate.hpp"
#include "etmas/observer.hpp"
#include "etmas/plant.hpp"
#include "etmas/rbf.hpp"
#include "etmas/trigger.hpp"

namespace etmas {

struct RbfConfig {
  // observer networks, input x_hat_1..l
  double obs_lo = -2.0;
  double obs_hi = 2.0;
  std::size_t obs_nodes_1d = 11;
  std::size_t obs_nodes_per_axis = 5;
  std::size_t obs_centers_high_dim = 30;  // Halton centres for inputs of dimension >= 3
  double obs_width_high_dim = 2.0;
  // controller networks, input T_{i,k}
  std::size_t ctrl_centers = 30;
  double ctrl_lo = -2.0;
  double ctrl_hi = 2.0;
  double ctrl_width = 2.0;

  bool operator==(const RbfConfig&) const = default;
};

/// Initial value of the auxiliary disturbance state.
enum class DisturbanceInit {
  ZeroEstimate,   // tau_hat(0) = -kappa x_hat(0), i.e. varpi_hat(0) = 0
  ZeroAuxiliary,  // tau_hat(0) = 0
};

struct MetricsConfig {
  double head_end = 0.5;
  double tail_start = 3.0;
  double ceiling = 1e3;

  bool operator==(const MetricsConfig&) const = default;
};

struct Scenario {
  Topology topology;
  PlantDynamics plant;
  std::string plant_id = "benchmark";
  ReferenceSignal reference;
  std::string reference_id = "benchmark";
  ObserverGains observer;
  ControllerGains controller;
  RbfConfig rbf;
  TriggerConfig trigger;
  std::vector<Eigen::VectorXd> x0;
  std::vector<Eigen::VectorXd> x_hat0;
  double horizon = 5.0;
  double dt = 1e-3;
  std::size_t log_stride = 1;
  std::uint64_t seed = 0;
  DisturbanceInit disturbance_init = DisturbanceInit::ZeroEstimate;
  MetricsConfig metrics;

  [[nodiscard]] std::size_t order() const noexcept { return plant.order(); }
  [[nodiscard]] std::size_t n_followers() const noexcept { return topology.n_followers(); }
  [[nodiscard]] long steps() const { return std::lround(horizon / dt); }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("sim.dt must be positive");
    if (!(horizon >= dt)) throw ConfigError("sim.horizon must be at least sim.dt");
    if (log_stride < 1) throw ConfigError("output.stride must be at least 1");
    const std::size_t n = order();
    if (n == 0) throw ConfigError("plant has no levels");
    if (n_followers() == 0) throw ConfigError("topology has no followers");
    if (observer.order() != n) throw ConfigError("observer order does not match the plant order");
    if (controller.order() != n) throw ConfigError("controller order does not match the plant order");
    controller.validate();
    trigger.validate();
    if (!reference.value || !reference.derivative) throw ConfigError("reference signal is not set");
    if (x0.size() != n_followers() || x_hat0.size() != n_followers()) {
      throw ConfigError("initial conditions need one entry per follower");
    }
    for (std::size_t i = 0; i < n_followers(); ++i) {
      if (std::size_t(x0[i].size()) != n || std::size_t(x_hat0[i].size()) != n) {
        throw ConfigError("initial condition of follower " + std::to_string(i + 1) + " does not match the plant order");
      }
      if (!x0[i].allFinite() || !x_hat0[i].allFinite()) throw ConfigError("initial conditions must be finite");
    }
    if (!(metrics.tail_start >= 0.0) || !(metrics.head_end > 0.0) || !(metrics.ceiling > 0.0)) {
      throw ConfigError("metrics windows and ceiling must be positive");
    }
  }
};

/// Two scenarios agree on everything except their trigger configuration.
inline bool same_except_trigger(const Scenario& a, const Scenario& b) {
  auto eq_vecs = [](const std::vector<Eigen::VectorXd>& x, const std::vector<Eigen::VectorXd>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i].size() != y[i].size() || x[i] != y[i]) return false;
    }
    return true;
  };
  const auto& ca = a.controller;
  const auto& cb = b.controller;
  return a.topology.adjacency() == b.topology.adjacency() && a.topology.pinning() == b.topology.pinning() &&
         a.plant_id == b.plant_id && a.reference_id == b.reference_id && a.observer.q() == b.observer.q() &&
         a.observer.kappa() == b.observer.kappa() && ca.r == cb.r && ca.c == cb.c && ca.eta == cb.eta &&
         ca.h == cb.h && ca.m == cb.m && ca.lambda == cb.lambda && ca.o == cb.o && a.rbf == b.rbf &&
         eq_vecs(a.x0, b.x0) && eq_vecs(a.x_hat0, b.x_hat0) && a.horizon == b.horizon && a.dt == b.dt &&
         a.seed == b.seed && a.disturbance_init == b.disturbance_init && a.metrics == b.metrics;
}

/// Controller quantities of one follower at one instant.
struct AgentSignals {
  Eigen::VectorXd z;         // z_1..z_n
  Eigen::VectorXd alpha;     // alpha(k) = alpha_k for k = 2..n+1; entries 0, 1 unused
  Eigen::VectorXd basis_sq;  // |E_k(T_k)|^2, k = 1..n
  double psi1 = 0.0;

  [[nodiscard]] double alpha_final() const { return alpha(alpha.size() - 1); }
  [[nodiscard]] double z_n() const { return z(z.size() - 1); }
};

class ClosedLoop {
 public:
  explicit ClosedLoop(const Scenario& sc) : sc_(sc), n_(sc.order()), agents_(sc.n_followers()) {
    sc_.validate();
    const auto& rc = sc_.rbf;
    for (std::size_t l = 1; l <= n_; ++l) {
      if (l == 1) {
        obs_layouts_.push_back(grid_layout(1, rc.obs_nodes_1d, rc.obs_lo, rc.obs_hi));
      } else if (l == 2) {
        obs_layouts_.push_back(grid_layout(2, rc.obs_nodes_per_axis, rc.obs_lo, rc.obs_hi));
      } else {
        obs_layouts_.push_back(
            halton_layout(l, rc.obs_centers_high_dim, rc.obs_lo, rc.obs_hi, rc.obs_width_high_dim, sc_.seed));
      }
    }
    ctrl_layouts_.resize(agents_);
    for (std::size_t i = 0; i < agents_; ++i) {
      for (std::size_t k = 1; k <= n_; ++k) {
        const std::size_t dim = nn_input_dim(k, sc_.topology.neighbors(i).size());
        ctrl_layouts_[i].push_back(halton_layout(dim, rc.ctrl_centers, rc.ctrl_lo, rc.ctrl_hi, rc.ctrl_width, sc_.seed));
      }
    }
    // per-agent block: x, x_hat, tau_hat, W_1..W_n, alpha_bar_2..n, theta
    w_offsets_.resize(n_);
    Eigen::Index off = 3 * Eigen::Index(n_);
    for (std::size_t l = 0; l < n_; ++l) {
      w_offsets_[l] = off;
      off += Eigen::Index(obs_layouts_[l].node_count());
    }
    abar_offset_ = off;
    off += Eigen::Index(n_) - 1;
    theta_offset_ = off;
    block_ = off + 1;
  }

  [[nodiscard]] const Scenario& scenario() const noexcept { return sc_; }
  [[nodiscard]] std::size_t agents() const noexcept { return agents_; }
  [[nodiscard]] std::size_t order() const noexcept { return n_; }
  [[nodiscard]] Eigen::Index state_size() const noexcept { return block_ * Eigen::Index(agents_); }
  [[nodiscard]] const RbfLayout& observer_layout(std::size_t level) const { return obs_layouts_.at(level - 1); }
  [[nodiscard]] const RbfLayout& controller_layout(std::size_t agent, std::size_t level) const {
    return ctrl_layouts_.at(agent).at(level - 1);
  }

  // Views into a flat state vector.
  [[nodiscard]] Eigen::VectorXd x(const Eigen::VectorXd& s, std::size_t i) const { return s.segment(base(i), N()); }
  [[nodiscard]] Eigen::VectorXd x_hat(const Eigen::VectorXd& s, std::size_t i) const {
    return s.segment(base(i) + N(), N());
  }
  [[nodiscard]] Eigen::VectorXd tau_hat(const Eigen::VectorXd& s, std::size_t i) const {
    return s.segment(base(i) + 2 * N(), N());
  }
  [[nodiscard]] Eigen::VectorXd weights(const Eigen::VectorXd& s, std::size_t i, std::size_t level) const {
    return s.segment(base(i) + w_offsets_[level - 1], Eigen::Index(obs_layouts_[level - 1].node_count()));
  }
  [[nodiscard]] Eigen::VectorXd alpha_bar(const Eigen::VectorXd& s, std::size_t i) const {
    return s.segment(base(i) + abar_offset_, N() - 1);
  }
  [[nodiscard]] double theta(const Eigen::VectorXd& s, std::size_t i) const { return s(base(i) + theta_offset_); }
  [[nodiscard]] Eigen::VectorXd varpi_hat(const Eigen::VectorXd& s, std::size_t i) const {
    return tau_hat(s, i) + sc_.observer.kappa().cwiseProduct(x_hat(s, i));
  }

  /// Initial state: plant and observer from the scenario, weights and Theta
  /// at zero, tau_hat per DisturbanceInit, and alpha_bar_k(0) = alpha_k(0).
  [[nodiscard]] Eigen::VectorXd initial_state() const {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(state_size());
    for (std::size_t i = 0; i < agents_; ++i) {
      s.segment(base(i), N()) = sc_.x0[i];
      s.segment(base(i) + N(), N()) = sc_.x_hat0[i];
      if (sc_.disturbance_init == DisturbanceInit::ZeroEstimate) {
        s.segment(base(i) + 2 * N(), N()) = -sc_.observer.kappa().cwiseProduct(sc_.x_hat0[i]);
      }
    }
    // alpha_k depends only on alpha_bar_{<k}, so fill the filters level by level.
    for (std::size_t k = 2; k <= n_; ++k) {
      const auto sig = signals(s, 0.0);
      for (std::size_t i = 0; i < agents_; ++i) s(base(i) + abar_offset_ + Eigen::Index(k) - 2) = sig[i].alpha(Eigen::Index(k));
    }
    return s;
  }

  [[nodiscard]] std::vector<AgentSignals> signals(const Eigen::VectorXd& s, double t) const {
    const double yr = sc_.reference.value(t);
    const double yr_dot = sc_.reference.derivative(t);
    std::vector<double> y(agents_);
    std::vector<Eigen::VectorXd> xh(agents_);
    std::vector<Eigen::VectorXd> vp(agents_);
    for (std::size_t j = 0; j < agents_; ++j) {
      y[j] = s(base(j));
      xh[j] = x_hat(s, j);
      vp[j] = varpi_hat(s, j);
    }
    const auto& g = sc_.controller;
    std::vector<AgentSignals> out(agents_);
    for (std::size_t i = 0; i < agents_; ++i) {
      AgentSignals& a = out[i];
      a.z = Eigen::VectorXd::Zero(N());
      a.alpha = Eigen::VectorXd::Zero(N() + 2);
      a.basis_sq = Eigen::VectorXd::Zero(N());
      const double th = theta(s, i);
      const Eigen::VectorXd abar = alpha_bar(s, i);
      a.psi1 = y[i] - xh[i](0);

      const auto& nbrs = sc_.topology.neighbors(i);
      std::vector<const Eigen::VectorXd*> nbx;
      std::vector<const Eigen::VectorXd*> nbv;
      for (std::size_t j : nbrs) {
        nbx.push_back(&xh[j]);
        nbv.push_back(&vp[j]);
      }

      a.z(0) = consensus_error(sc_.topology, y, yr, i);
      {
        const Eigen::VectorXd t1 = assemble_nn_input(1, yr, yr_dot, th, xh[i], nbx, vp[i], nbv);
        const Eigen::VectorXd e1 = basis(ctrl_layouts_[i][0], t1);
        a.basis_sq(0) = e1.squaredNorm();
        a.alpha(2) = virtual_control_1(g, sc_.topology, i, a.z(0), th, e1);
      }
      for (std::size_t k = 2; k <= n_; ++k) {
        const auto kk = Eigen::Index(k);
        a.z(kk - 1) = xh[i](kk - 1) - abar(kk - 2);
        const Eigen::VectorXd tk = assemble_nn_input(k, yr, yr_dot, th, xh[i], nbx, vp[i], nbv);
        const Eigen::VectorXd ek = basis(ctrl_layouts_[i][k - 1], tk);
        a.basis_sq(kk - 1) = ek.squaredNorm();
        a.alpha(kk + 1) = virtual_control_k(g, k, a.z(kk - 1), th, ek, a.alpha(kk), abar(kk - 2), a.psi1,
                                            sc_.observer.q()(kk - 1));
      }
    }
    return out;
  }

  /// Time derivative of the full state with the controls `u` held.
  [[nodiscard]] Eigen::VectorXd derivative(const Eigen::VectorXd& s, double t, std::span<const double> u) const {
    const auto sig = signals(s, t);
    const auto& og = sc_.observer;
    const auto& g = sc_.controller;
    Eigen::VectorXd ds(state_size());
    for (std::size_t i = 0; i < agents_; ++i) {
      try {
        const AgentPlantState plant{x(s, i)};
        const ObserverState obs{x_hat(s, i), tau_hat(s, i)};
        const Eigen::Index b = base(i);
        ds.segment(b, N()) = plant_derivative(sc_.plant, plant, u[i], t);

        Eigen::VectorXd f_hat(N());
        std::vector<Eigen::VectorXd> w(n_);
        for (std::size_t l = 1; l <= n_; ++l) {
          w[l - 1] = weights(s, i, l);
          f_hat(Eigen::Index(l) - 1) = approximate(obs_layouts_[l - 1], w[l - 1], obs.x_hat.head(Eigen::Index(l)));
        }
        ds.segment(b + N(), N()) = observer_derivative(og, obs, plant.x(0), u[i], f_hat);
        ds.segment(b + 2 * N(), N()) = disturbance_observer_derivative(og, obs, f_hat, u[i]);

        const auto xs = as_span(plant.x);
        for (std::size_t l = 1; l <= n_; ++l) {
          const auto li = Eigen::Index(l) - 1;
          const double kap = og.kappa()(li);
          const double tau_true = sc_.plant.disturbance(l, xs, t) - kap * plant.x(li);
          const double tau_err = tau_true - obs.tau_hat(li);
          ds.segment(b + w_offsets_[l - 1], w[l - 1].size()) =
              weight_update_rate(w[l - 1], obs_layouts_[l - 1], obs.x_hat.head(li + 1), tau_err, g.h(li), g.eta(li), kap);
        }
        const Eigen::VectorXd abar = alpha_bar(s, i);
        for (std::size_t k = 2; k <= n_; ++k) {
          const auto kk = Eigen::Index(k);
          ds(b + abar_offset_ + kk - 2) = filter_derivative(g.m_of(k), abar(kk - 2), sig[i].alpha(kk));
        }
        ds(b + theta_offset_) = theta_update_rate(g, theta(s, i), as_span(sig[i].z), as_span(sig[i].basis_sq));
      } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(e.what()) + " (follower " + std::to_string(i + 1) + ", t = " +
                                  std::to_string(t) + ")",
                              t, i, e.level());
      }
    }
    return ds;
  }

  /// RK4 advance by dt with u held.
  [[nodiscard]] Eigen::VectorXd step(const Eigen::VectorXd& s, double t, std::span<const double> u) const {
    auto rhs = [&](const Eigen::VectorXd& v, double tt) { return derivative(v, tt, u); };
    Eigen::VectorXd next = rk4_step(rhs, s, t, sc_.dt);
    for (std::size_t i = 0; i < agents_; ++i) {
      if (!next.segment(base(i), block_).allFinite()) {
        throw DivergenceError("state diverged (follower " + std::to_string(i + 1) + ", t = " +
                                  std::to_string(t + sc_.dt) + ")",
                              t + sc_.dt, i, 0);
      }
    }
    return next;
  }

 private:
  [[nodiscard]] Eigen::Index N() const noexcept { return Eigen::Index(n_); }
  [[nodiscard]] Eigen::Index base(std::size_t i) const noexcept { return block_ * Eigen::Index(i); }

  Scenario sc_;
  std::size_t n_;
  std::size_t agents_;
  std::vector<RbfLayout> obs_layouts_;
  std::vector<std::vector<RbfLayout>> ctrl_layouts_;
  std::vector<Eigen::Index> w_offsets_;
  Eigen::Index abar_offset_ = 0;
  Eigen::Index theta_offset_ = 0;
  Eigen::Index block_ = 0;
};

struct EventRecord {
  double time = 0.0;
  std::size_t agent = 0;  // 0-based
  Branch branch = Branch::Fixed;
  double u = 0.0;
};

/// Sampled trajectories as a column table plus the event log.
struct TrajectoryLog {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<EventRecord> events;

  [[nodiscard]] std::size_t index_of(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw std::out_of_range("no column named " + name);
    return std::size_t(it - columns.begin());
  }

  [[nodiscard]] std::vector<double> column(const std::string& name) const {
    const std::size_t c = index_of(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }
};

inline std::vector<std::string> trajectory_columns(std::size_t agents, std::size_t n) {
  std::vector<std::string> cols{"time"};
  for (std::size_t i = 1; i <= agents; ++i) {
    const std::string a = std::to_string(i);
    for (const char* p : {"x", "xhat", "varpihat", "z"}) {
      for (std::size_t k = 1; k <= n; ++k) cols.push_back(std::string(p) + "_" + a + "_" + std::to_string(k));
    }
    cols.push_back("u_" + a);
    cols.push_back("w_" + a);
    cols.push_back("theta_" + a);
    for (std::size_t k = 1; k <= n; ++k) cols.push_back("wnorm_" + a + "_" + std::to_string(k));
  }
  return cols;
}

struct AgentMetrics {
  std::size_t events = 0;           // including the t = 0 event
  std::size_t updates = 0;          // events after t = 0
  std::size_t fixed_branch = 0;     // branch split of the updates
  std::size_t relative_branch = 0;
  std::size_t periodic = 0;
  double min_interval = std::numeric_limits<double>::quiet_NaN();
  double mean_interval = std::numeric_limits<double>::quiet_NaN();
  double rms_head = 0.0;        // RMS of z_1 over [0, head_end]
  double rms_tail = 0.0;        // RMS of z_1 over [tail_start, T_end)
  double max_abs_z1_tail = 0.0;
  double max_w_rate = 0.0;      // max |w(t_{k+1}) - w(t_k)| / dt
  double zeno_bound = 0.0;      // min threshold / max_w_rate
  double max_abs_z = 0.0;
  double max_psi_norm = 0.0;
  double max_abs_theta = 0.0;
  double max_w_norm = 0.0;
  double max_abs_e = 0.0;       // boundary-layer error alpha_bar - alpha
  double max_abs_u = 0.0;
};

struct RunMetrics {
  Strategy strategy = Strategy::Fixed;
  double horizon = 0.0;
  double dt = 0.0;
  std::vector<AgentMetrics> agents;
  bool diverged = false;
  std::string divergence_reason;
  double ceiling = 1e3;

  /// All tracked error magnitudes below the ceiling for every follower.
  [[nodiscard]] bool bounded() const {
    if (diverged) return false;
    for (const auto& a : agents) {
      if (!(a.max_abs_z < ceiling && a.max_psi_norm < ceiling && a.max_abs_theta < ceiling && a.max_w_norm < ceiling &&
            a.max_abs_e < ceiling)) {
        return false;
      }
    }
    return true;
  }
};

struct RunResult {
  TrajectoryLog log;
  RunMetrics metrics;
};

/// Runs the scenario to its horizon. Deterministic; throws DivergenceError.
inline RunResult run(const Scenario& sc) {
  const ClosedLoop loop(sc);
  const std::size_t na = loop.agents();
  const std::size_t n = loop.order();
  const long steps = sc.steps();
  const double dt = sc.dt;
  const auto& mc = sc.metrics;

  RunResult res;
  res.log.columns = trajectory_columns(na, n);
  res.log.rows.reserve(std::size_t(steps / long(sc.log_stride)) + 2);
  std::vector<TriggerState> trig(na);
  std::vector<double> u(na, 0.0);
  std::vector<double> w_prev(na, 0.0);

  struct Acc {
    double head_sq = 0.0;
    std::size_t head_n = 0;
    double tail_sq = 0.0;
    std::size_t tail_n = 0;
  };
  std::vector<Acc> acc(na);
  RunMetrics& m = res.metrics;
  m.strategy = sc.trigger.strategy;
  m.horizon = sc.horizon;
  m.dt = dt;
  m.ceiling = mc.ceiling;
  m.agents.resize(na);

  Eigen::VectorXd s = loop.initial_state();
  for (long k = 0; k <= steps; ++k) {
    if (k > 0) s = loop.step(s, double(k - 1) * dt, u);
    const double t = double(k) * dt;
    const auto sig = loop.signals(s, t);
    std::vector<double> w(na);
    for (std::size_t i = 0; i < na; ++i) {
      w[i] = candidate(sc.trigger, sig[i].alpha_final(), sig[i].z_n(), trig[i].u_applied);
      if (!std::isfinite(w[i])) {
        throw DivergenceError("non-finite control candidate (follower " + std::to_string(i + 1) + ", t = " +
                                  std::to_string(t) + ")",
                              t, i, 0);
      }
      if (const auto fire = should_fire(sc.trigger, trig[i], w[i], t, dt)) {
        apply_event(trig[i], w[i], t, *fire);
        res.log.events.push_back({t, i, *fire, w[i]});
      }
      trig[i].w_current = w[i];
      u[i] = trig[i].u_applied;
    }

    for (std::size_t i = 0; i < na; ++i) {
      AgentMetrics& am = m.agents[i];
      const double z1 = sig[i].z(0);
      if (t <= mc.head_end + 1e-9 * dt) {
        acc[i].head_sq += z1 * z1;
        ++acc[i].head_n;
      }
      if (t >= mc.tail_start - 1e-9 * dt) {
        acc[i].tail_sq += z1 * z1;
        ++acc[i].tail_n;
        am.max_abs_z1_tail = std::max(am.max_abs_z1_tail, std::abs(z1));
      }
      if (k > 0) am.max_w_rate = std::max(am.max_w_rate, std::abs(w[i] - w_prev[i]) / dt);
      w_prev[i] = w[i];
      am.max_abs_z = std::max(am.max_abs_z, sig[i].z.cwiseAbs().maxCoeff());
      am.max_psi_norm = std::max(am.max_psi_norm, (loop.x(s, i) - loop.x_hat(s, i)).norm());
      am.max_abs_theta = std::max(am.max_abs_theta, std::abs(loop.theta(s, i)));
      for (std::size_t l = 1; l <= n; ++l) am.max_w_norm = std::max(am.max_w_norm, loop.weights(s, i, l).norm());
      if (n > 1) {
        const Eigen::VectorXd e = loop.alpha_bar(s, i) - sig[i].alpha.segment(2, Eigen::Index(n) - 1);
        am.max_abs_e = std::max(am.max_abs_e, e.cwiseAbs().maxCoeff());
      }
      am.max_abs_u = std::max(am.max_abs_u, std::abs(u[i]));
    }

    if (k % long(sc.log_stride) == 0) {
      std::vector<double> row;
      row.reserve(res.log.columns.size());
      row.push_back(t);
      for (std::size_t i = 0; i < na; ++i) {
        for (const Eigen::VectorXd& v : {loop.x(s, i), loop.x_hat(s, i), loop.varpi_hat(s, i), sig[i].z}) {
          row.insert(row.end(), v.data(), v.data() + v.size());
        }
        row.push_back(u[i]);
        row.push_back(w[i]);
        row.push_back(loop.theta(s, i));
        for (std::size_t l = 1; l <= n; ++l) row.push_back(loop.weights(s, i, l).norm());
      }
      res.log.rows.push_back(std::move(row));
    }
  }

  for (std::size_t i = 0; i < na; ++i) {
    AgentMetrics& am = m.agents[i];
    const TriggerState& ts = trig[i];
    am.events = ts.event_count();
    am.updates = am.events - 1;
    for (std::size_t e = 1; e < ts.event_log.size(); ++e) {
      switch (ts.event_log[e].branch) {
        case Branch::Fixed: ++am.fixed_branch; break;
        case Branch::Relative: ++am.relative_branch; break;
        case Branch::Periodic: ++am.periodic; break;
      }
    }
    if (ts.event_log.size() >= 2) {
      // decisions sit on the k*dt grid, so measure intervals in whole steps
      long mn = std::numeric_limits<long>::max();
      for (std::size_t e = 1; e < ts.event_log.size(); ++e) {
        mn = std::min(mn, std::lround((ts.event_log[e].time - ts.event_log[e - 1].time) / dt));
      }
      am.min_interval = double(mn) * dt;
      am.mean_interval = (ts.event_log.back().time - ts.event_log.front().time) / double(ts.event_log.size() - 1);
    }
    am.rms_head = acc[i].head_n ? std::sqrt(acc[i].head_sq / double(acc[i].head_n)) : 0.0;
    am.rms_tail = acc[i].tail_n ? std::sqrt(acc[i].tail_sq / double(acc[i].tail_n)) : 0.0;
    am.zeno_bound = am.max_w_rate > 0.0 ? sc.trigger.min_threshold() / am.max_w_rate : 0.0;
  }
  return res;
}

struct StrategyRun {
  Strategy strategy = Strategy::Fixed;
  RunMetrics metrics;
};

struct ComparisonReport {
  std::vector<StrategyRun> runs;

  [[nodiscard]] const RunMetrics* find(Strategy s) const {
    for (const auto& r : runs) {
      if (r.strategy == s) return &r.metrics;
    }
    return nullptr;
  }

  /// relative <= switch <= fixed per follower, using whichever of the three
  /// are present, and fixed below the periodic count when both are present.
  [[nodiscard]] std::vector<bool> ordering() const {
    const RunMetrics* fx = find(Strategy::Fixed);
    const RunMetrics* sw = find(Strategy::Switch);
    const RunMetrics* rl = find(Strategy::Relative);
    const RunMetrics* pd = find(Strategy::Periodic);
    std::size_t na = runs.empty() ? 0 : runs.front().metrics.agents.size();
    std::vector<bool> ok(na, true);
    for (std::size_t i = 0; i < na; ++i) {
      auto cnt = [i](const RunMetrics* r) { return r->agents[i].updates; };
      if (rl && sw) ok[i] = ok[i] && cnt(rl) <= cnt(sw);
      if (sw && fx) ok[i] = ok[i] && cnt(sw) <= cnt(fx);
      if (rl && fx) ok[i] = ok[i] && cnt(rl) <= cnt(fx);
      if (fx && pd) ok[i] = ok[i] && cnt(fx) < cnt(pd);
    }
    return ok;
  }

  [[nodiscard]] std::string table() const;
};

inline std::string format_switch_cell(const AgentMetrics& a) {
  return std::to_string(a.updates) + "(" + std::to_string(a.relative_branch) + "+" + std::to_string(a.fixed_branch) + ")";
}

inline std::string ComparisonReport::table() const {
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s.append(w - s.size(), ' ');
    return s;
  };
  auto num = [](double v, int prec) {
    if (!std::isfinite(v)) return std::string("n/a");
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(prec);
    os << v;
    return os.str();
  };
  const RunMetrics* fx = find(Strategy::Fixed);
  const RunMetrics* sw = find(Strategy::Switch);
  const RunMetrics* rl = find(Strategy::Relative);
  const RunMetrics* pd = find(Strategy::Periodic);
  const std::size_t na = runs.empty() ? 0 : runs.front().metrics.agents.size();
  const auto order_ok = ordering();

  std::ostringstream os;
  os << "Controller updates after t = 0\n";
  os << pad("", 12) << pad("Fixed", 10) << pad("Switch", 18) << pad("Relative", 10) << "Ordering\n";
  for (std::size_t i = 0; i < na; ++i) {
    os << pad("Follower " + std::to_string(i + 1), 12);
    os << pad(fx ? std::to_string(fx->agents[i].updates) : "-", 10);
    os << pad(sw ? format_switch_cell(sw->agents[i]) : "-", 18);
    os << pad(rl ? std::to_string(rl->agents[i].updates) : "-", 10);
    os << (order_ok[i] ? "PASS" : "FAIL") << "\n";
  }
  if (pd) {
    os << pad("Periodic", 12);
    for (std::size_t i = 0; i < na; ++i) os << (i ? " / " : "") << pd->agents[i].updates;
    os << "  (reference baseline per follower)\n";
  }
  os << "\nPer-strategy detail (min interval s | mean interval s | tail RMS z1 | max tail |z1|)\n";
  for (const auto& r : runs) {
    os << std::string(to_string(r.strategy)) << "\n";
    for (std::size_t i = 0; i < na; ++i) {
      const auto& a = r.metrics.agents[i];
      os << "  " << pad("Follower " + std::to_string(i + 1), 12) << pad(num(a.min_interval, 4), 10)
         << pad(num(a.mean_interval, 4), 10) << pad(num(a.rms_tail, 5), 10) << num(a.max_abs_z1_tail, 5) << "\n";
    }
  }
  return os.str();
}

/// Copies of `base` with each of the four trigger strategies.
inline std::vector<Scenario> strategy_variants(const Scenario& base) {
  std::vector<Scenario> out;
  for (Strategy s : {Strategy::Fixed, Strategy::Switch, Strategy::Relative, Strategy::Periodic}) {
    Scenario v = base;
    v.trigger.strategy = s;
    out.push_back(std::move(v));
  }
  return out;
}

/// Runs scenarios that differ only in trigger configuration, concurrently.
inline ComparisonReport compare(const std::vector<Scenario>& scenarios) {
  if (scenarios.empty()) throw ConfigError("compare needs at least one scenario");
  for (std::size_t k = 1; k < scenarios.size(); ++k) {
    if (!same_except_trigger(scenarios.front(), scenarios[k])) {
      throw ConfigError("scenario " + std::to_string(k) + " differs from scenario 0 outside the trigger configuration");
    }
  }
  std::vector<std::future<RunMetrics>> jobs;
  for (const auto& sc : scenarios) {
    jobs.push_back(std::async(std::launch::async, [&sc] { return run(sc).metrics; }));
  }
  ComparisonReport rep;
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    rep.runs.push_back({scenarios[k].trigger.strategy, jobs[k].get()});
  }
  return rep;
}

}  // namespace etmas
