#pragma once

// Luenberger-type state observer with NN compensation and the auxiliary
// variable disturbance observer, per follower with scalar levels:
//
//   x_hat_k' = x_hat_{k+1} + f_hat_k + q_k psi_1 + varpi_hat_k   (x_hat_{n+1} := u)
//   tau_hat_k' = -kappa_k (f_hat_k + tau_hat_k + kappa_k x_hat_k + x_hat_{k+1})
//   varpi_hat_k = tau_hat_k + kappa_k x_hat_k
//
// with psi_1 = y - x_hat_1.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>

#include "etmas/errors.hpp"

namespace etmas {

/// Companion matrix with first column -q and identity on the superdiagonal.
inline Eigen::MatrixXd companion_matrix(const Eigen::VectorXd& q) {
  const Eigen::Index n = q.size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  p.col(0) = -q;
  for (Eigen::Index k = 0; k + 1 < n; ++k) p(k, k + 1) = 1.0;
  return p;
}

inline Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& m) { return Eigen::EigenSolver<Eigen::MatrixXd>(m).eigenvalues(); }

inline bool is_hurwitz(const Eigen::MatrixXd& m) {
  const Eigen::VectorXcd ev = eigenvalues(m);
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (!(ev(k).real() < 0.0)) return false;
  }
  return true;
}

class ObserverGains {
 public:
  ObserverGains() = default;
  /// Throws ConfigError when the companion matrix is not Hurwitz or any
  /// kappa_k <= 3/2.
  ObserverGains(Eigen::VectorXd q, Eigen::VectorXd kappa) : q_(std::move(q)), kappa_(std::move(kappa)) {
    if (q_.size() < 1 || kappa_.size() != q_.size()) throw ConfigError("observer.q and observer.kappa need equal, non-zero length");
    for (Eigen::Index k = 0; k < kappa_.size(); ++k) {
      if (!(kappa_(k) > 1.5)) {
        throw ConfigError("observer.kappa[" + std::to_string(k) + "] must exceed 3/2 (kappa > 3/2)");
      }
    }
    p_ = companion_matrix(q_);
    if (!is_hurwitz(p_)) throw ConfigError("observer.q does not make the companion matrix Hurwitz");
  }

  [[nodiscard]] std::size_t order() const noexcept { return std::size_t(q_.size()); }
  [[nodiscard]] const Eigen::VectorXd& q() const noexcept { return q_; }
  [[nodiscard]] const Eigen::VectorXd& kappa() const noexcept { return kappa_; }
  [[nodiscard]] const Eigen::MatrixXd& P() const noexcept { return p_; }

 private:
  Eigen::VectorXd q_;
  Eigen::VectorXd kappa_;
  Eigen::MatrixXd p_;
};

struct ObserverState {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd tau_hat;

  [[nodiscard]] Eigen::VectorXd varpi_hat(const ObserverGains& g) const {
    return tau_hat + g.kappa().cwiseProduct(x_hat);
  }
};

namespace detail {
inline void require_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw DivergenceError(std::string("non-finite ") + what, 0.0, 0, 0);
}
}  // namespace detail

inline Eigen::VectorXd observer_derivative(const ObserverGains& g, const ObserverState& obs, double y, double u,
                                           const Eigen::VectorXd& f_hat) {
  const Eigen::Index n = Eigen::Index(g.order());
  if (obs.x_hat.size() != n || obs.tau_hat.size() != n || f_hat.size() != n) {
    throw ConfigError("observer dimensions do not match the observer order");
  }
  if (!std::isfinite(y) || !std::isfinite(u)) throw DivergenceError("non-finite observer input", 0.0, 0, 0);
  detail::require_finite(f_hat, "rbf output");
  const double psi1 = y - obs.x_hat(0);
  const Eigen::VectorXd varpi = obs.varpi_hat(g);
  Eigen::VectorXd d(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double next = (k + 1 < n) ? obs.x_hat(k + 1) : u;
    d(k) = next + f_hat(k) + g.q()(k) * psi1 + varpi(k);
  }
  return d;
}

inline Eigen::VectorXd disturbance_observer_derivative(const ObserverGains& g, const ObserverState& obs,
                                                       const Eigen::VectorXd& f_hat, double u) {
  const Eigen::Index n = Eigen::Index(g.order());
  if (obs.x_hat.size() != n || obs.tau_hat.size() != n || f_hat.size() != n) {
    throw ConfigError("observer dimensions do not match the observer order");
  }
  if (!std::isfinite(u)) throw DivergenceError("non-finite observer input", 0.0, 0, 0);
  detail::require_finite(f_hat, "rbf output");
  const auto& kap = g.kappa();
  Eigen::VectorXd d(n);
  for (Eigen::Index l = 0; l < n; ++l) {
    const double next = (l + 1 < n) ? obs.x_hat(l + 1) : u;
    d(l) = -kap(l) * (f_hat(l) + obs.tau_hat(l) + kap(l) * obs.x_hat(l) + next);
  }
  return d;
}

/// Solves P^T F + F P = -2 H for symmetric F. Throws DiagnosticError when P is
/// not Hurwitz or H is not symmetric positive definite.
inline Eigen::MatrixXd lyapunov_diagnostic(const Eigen::MatrixXd& p, const Eigen::MatrixXd& h) {
  const Eigen::Index n = p.rows();
  if (n == 0 || p.cols() != n || h.rows() != n || h.cols() != n) throw DiagnosticError("P and H must be square and equal size");
  if (!is_hurwitz(p)) throw DiagnosticError("P is not Hurwitz; the Lyapunov equation has no positive-definite solution");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + h.cwiseAbs().maxCoeff())) {
    throw DiagnosticError("H must be symmetric");
  }
  if (Eigen::LLT<Eigen::MatrixXd>(h).info() != Eigen::Success) throw DiagnosticError("H must be positive definite");

  // Column-major vec: vec(P^T F) = (I kron P^T) vec F, vec(F P) = (P^T kron I) vec F.
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd pt = p.transpose();
  Eigen::MatrixXd k(n * n, n * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      k.block(i * n, j * n, n, n) = eye(i, j) * pt + pt(i, j) * eye;
    }
  }
  const Eigen::VectorXd rhs = (-2.0 * h).reshaped();
  const Eigen::VectorXd f = k.fullPivLu().solve(rhs);
  Eigen::MatrixXd fm = f.reshaped(n, n);
  return 0.5 * (fm + fm.transpose());
}

/// max |P^T F + F P + 2H|.
inline double lyapunov_residual(const Eigen::MatrixXd& p, const Eigen::MatrixXd& f, const Eigen::MatrixXd& h) {
  return (p.transpose() * f + f * p + 2.0 * h).cwiseAbs().maxCoeff();
}

}  // namespace etmas
