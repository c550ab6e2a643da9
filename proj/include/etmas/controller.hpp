#pragma once

// Adaptive backstepping with first-order (dynamic surface) filters.
//
// Levels are 1-based throughout: z_1 is the graph output error, z_k =
// x_hat_k - alpha_bar_k for k >= 2, alpha_{k+1} is the virtual control
// produced at step k and alpha_{n+1} is the final control law.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "etmas/errors.hpp"
#include "etmas/graph.hpp"

namespace etmas {

struct ControllerGains {
  Eigen::VectorXd r;    // step gains, negative
  Eigen::VectorXd c;    // NN bound constants, positive
  Eigen::VectorXd eta;  // weight-law learning rates
  Eigen::VectorXd h;    // weight-law leakage
  Eigen::VectorXd m;    // filter time constants for alpha_bar_2..n (length n-1)
  double lambda = 0.0;  // Theta leakage
  double o = 0.0;       // Theta learning rate

  [[nodiscard]] std::size_t order() const noexcept { return std::size_t(r.size()); }

  /// Filter constant of alpha_bar_k, k in 2..n.
  [[nodiscard]] double m_of(std::size_t k) const { return m(Eigen::Index(k) - 2); }

  void validate() const {
    const Eigen::Index n = r.size();
    if (n < 1) throw ConfigError("controller.r must not be empty");
    if (c.size() != n || eta.size() != n || h.size() != n) {
      throw ConfigError("controller.c, controller.eta and controller.h need one entry per level");
    }
    if (m.size() != n - 1) throw ConfigError("controller.m needs n-1 entries (one per filter)");
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::string lvl = "[" + std::to_string(k) + "]";
      if (!(r(k) < 0.0)) throw ConfigError("controller.r" + lvl + " must be negative (r < 0)");
      if (!(c(k) > 0.0)) throw ConfigError("controller.c" + lvl + " must be positive");
      if (!(eta(k) > 0.0)) throw ConfigError("controller.eta" + lvl + " must be positive");
      if (!(h(k) > 0.0)) throw ConfigError("controller.h" + lvl + " must be positive");
    }
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      if (!(m(k) > 0.0)) throw ConfigError("controller.m[" + std::to_string(k) + "] must be positive");
    }
    if (!(lambda > 0.0)) throw ConfigError("controller.lambda must be positive");
    if (!(o > 0.0)) throw ConfigError("controller.o must be positive");
  }

  [[nodiscard]] std::vector<std::string> warnings() const {
    std::vector<std::string> out;
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      if (m(k) > 0.1) out.push_back("controller.m[" + std::to_string(k) + "] = " + std::to_string(m(k)) + " is large (> 0.1)");
    }
    return out;
  }
};

struct ControllerState {
  Eigen::VectorXd alpha_bar;         // alpha_bar_2..n
  double theta_hat = 0.0;
  std::vector<Eigen::VectorXd> w_hats;  // observer NN weights per level
  Eigen::VectorXd last_z;
};

/// alpha_2 = (r_1 z_1 - z_1/2 - Theta/(2 c_1^2) z_1 |E|^2) / (d_i + b_i)
inline double virtual_control_1(const ControllerGains& g, const Topology& topo, std::size_t i, double z1,
                                double theta_hat, const Eigen::VectorXd& basis_t1) {
  const double db = topo.d(i) + topo.b(i);
  if (!(db > 0.0)) throw ConfigError("follower " + std::to_string(i + 1) + " has d_i + b_i = 0");
  const double c = g.c(0);
  const double ee = basis_t1.squaredNorm();
  return (g.r(0) * z1 - 0.5 * z1 - theta_hat / (2.0 * c * c) * z1 * ee) / db;
}

/// alpha_{k+1} for 2 <= k <= n:
/// r_k z_k - z_k/2 + (alpha_k - alpha_bar_k)/m_k - q_k psi_1 - Theta/(2 c_k^2) z_k |E|^2
inline double virtual_control_k(const ControllerGains& g, std::size_t k, double z_k, double theta_hat,
                                const Eigen::VectorXd& basis_tk, double alpha_k, double alpha_bar_k, double psi1,
                                double q_k) {
  if (k < 2 || k > g.order()) throw std::out_of_range("virtual_control_k: level " + std::to_string(k) + " out of range");
  const auto idx = Eigen::Index(k - 1);
  const double c = g.c(idx);
  const double ee = basis_tk.squaredNorm();
  return g.r(idx) * z_k - 0.5 * z_k + (alpha_k - alpha_bar_k) / g.m_of(k) - q_k * psi1 -
         theta_hat / (2.0 * c * c) * z_k * ee;
}

/// m alpha_bar' + alpha_bar = alpha
inline double filter_derivative(double m, double alpha_bar, double alpha) {
  if (!(m > 0.0)) throw ConfigError("filter constant must be positive");
  return (alpha - alpha_bar) / m;
}

/// -lambda Theta + sum_k o/(2 c_k^2) z_k^2 |E_k|^2
inline double theta_update_rate(const ControllerGains& g, double theta_hat, std::span<const double> z,
                                std::span<const double> basis_norms_sq) {
  if (z.size() != g.order() || basis_norms_sq.size() != g.order()) {
    throw ConfigError("theta_update_rate: z and basis norms need one entry per level");
  }
  double rate = -g.lambda * theta_hat;
  for (std::size_t k = 0; k < z.size(); ++k) {
    const double c = g.c(Eigen::Index(k));
    rate += g.o / (2.0 * c * c) * z[k] * z[k] * basis_norms_sq[k];
  }
  return rate;
}

/// Dimension of the step-k NN input for a follower with `n_neighbors`
/// in-neighbours: 2 + 2k(1 + n_neighbors).
inline std::size_t nn_input_dim(std::size_t k, std::size_t n_neighbors) { return 2 + 2 * k * (1 + n_neighbors); }

/// Step-k NN input
///   k = 1:  [y_r, y_r', x_hat_i(1..k), x_hat_j(1..k)..., varpi_i(1..k), varpi_j(1..k)...]
///   k >= 2: same with Theta in place of y_r'.
/// Neighbour blocks follow the order given, which callers keep ascending by
/// agent index.
inline Eigen::VectorXd assemble_nn_input(std::size_t k, double y_r, double y_r_dot, double theta_hat,
                                         const Eigen::VectorXd& own_x_hat,
                                         std::span<const Eigen::VectorXd* const> neighbor_x_hat,
                                         const Eigen::VectorXd& own_varpi_hat,
                                         std::span<const Eigen::VectorXd* const> neighbor_varpi_hat) {
  if (k < 1) throw std::out_of_range("assemble_nn_input: level must be >= 1");
  if (neighbor_x_hat.size() != neighbor_varpi_hat.size()) {
    throw ConfigError("assemble_nn_input: neighbour state and disturbance lists differ in length");
  }
  const auto kk = Eigen::Index(k);
  auto check = [kk](const Eigen::VectorXd& v) {
    if (v.size() < kk) throw ConfigError("assemble_nn_input: estimate shorter than the requested prefix");
  };
  check(own_x_hat);
  check(own_varpi_hat);
  Eigen::VectorXd t(Eigen::Index(nn_input_dim(k, neighbor_x_hat.size())));
  Eigen::Index pos = 0;
  t(pos++) = y_r;
  t(pos++) = (k == 1) ? y_r_dot : theta_hat;
  t.segment(pos, kk) = own_x_hat.head(kk);
  pos += kk;
  for (const auto* nb : neighbor_x_hat) {
    check(*nb);
    t.segment(pos, kk) = nb->head(kk);
    pos += kk;
  }
  t.segment(pos, kk) = own_varpi_hat.head(kk);
  pos += kk;
  for (const auto* nb : neighbor_varpi_hat) {
    check(*nb);
    t.segment(pos, kk) = nb->head(kk);
    pos += kk;
  }
  return t;
}

}  // namespace etmas
