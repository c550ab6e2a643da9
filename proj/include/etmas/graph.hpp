#pragma once

// Directed leader-follower communication topology.
//
// Convention: adjacency(i, j) == 1 means follower i receives information from
// follower j, so row i of the adjacency weights agent i's in-neighbours.

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "etmas/errors.hpp"

namespace etmas {

class Topology {
 public:
  /// Empty topology with zero followers; use build() for a usable one.
  Topology() = default;

  /// Validates and builds the topology. Throws TopologyError.
  static Topology build(const Eigen::MatrixXd& adjacency, const Eigen::VectorXd& pinning);

  [[nodiscard]] std::size_t n_followers() const noexcept { return static_cast<std::size_t>(adjacency_.rows()); }
  [[nodiscard]] const Eigen::MatrixXd& adjacency() const noexcept { return adjacency_; }
  [[nodiscard]] const Eigen::VectorXd& pinning() const noexcept { return pinning_; }
  [[nodiscard]] const Eigen::VectorXd& in_degree() const noexcept { return in_degree_; }
  [[nodiscard]] const Eigen::MatrixXd& laplacian() const noexcept { return laplacian_; }

  [[nodiscard]] double a(std::size_t i, std::size_t j) const { return adjacency_(Eigen::Index(i), Eigen::Index(j)); }
  [[nodiscard]] double b(std::size_t i) const { return pinning_(Eigen::Index(i)); }
  [[nodiscard]] double d(std::size_t i) const { return in_degree_(Eigen::Index(i)); }

  /// In-neighbours of follower i in ascending index order.
  [[nodiscard]] const std::vector<std::size_t>& neighbors(std::size_t i) const { return neighbors_.at(i); }

 private:
  Eigen::MatrixXd adjacency_;
  Eigen::VectorXd pinning_;
  Eigen::VectorXd in_degree_;
  Eigen::MatrixXd laplacian_;
  std::vector<std::vector<std::size_t>> neighbors_;
};

inline Topology build_topology(const Eigen::MatrixXd& adjacency, const Eigen::VectorXd& pinning) {
  return Topology::build(adjacency, pinning);
}

inline Topology Topology::build(const Eigen::MatrixXd& adjacency, const Eigen::VectorXd& pinning) {
  using Kind = TopologyError::Kind;
  const Eigen::Index n = adjacency.rows();
  if (n == 0 || adjacency.cols() != n) {
    throw TopologyError(Kind::DimensionMismatch, "adjacency must be a non-empty square matrix");
  }
  if (pinning.size() != n) {
    throw TopologyError(Kind::DimensionMismatch,
                        "pinning has " + std::to_string(pinning.size()) + " entries, expected " + std::to_string(n));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = adjacency(i, j);
      if (v != 0.0 && v != 1.0) {
        throw TopologyError(Kind::NonBinaryEntry, "adjacency(" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                                                      ") must be 0 or 1");
      }
    }
    if (adjacency(i, i) != 0.0) {
      throw TopologyError(Kind::SelfLoop, "self-loop at follower " + std::to_string(i + 1));
    }
    if (!(pinning(i) >= 0.0)) {
      throw TopologyError(Kind::NegativePinning, "pinning gain of follower " + std::to_string(i + 1) +
                                                     " must be non-negative");
    }
  }

  Topology topo;
  topo.adjacency_ = adjacency;
  topo.pinning_ = pinning;
  topo.in_degree_ = adjacency.rowwise().sum();
  topo.laplacian_ = Eigen::MatrixXd(topo.in_degree_.asDiagonal()) - adjacency;
  topo.neighbors_.resize(std::size_t(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (topo.in_degree_(i) + pinning(i) <= 0.0) {
      throw TopologyError(Kind::IsolatedFollower, "follower " + std::to_string(i + 1) +
                                                      " receives no information (d_i + b_i = 0)");
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (adjacency(i, j) != 0.0) topo.neighbors_[std::size_t(i)].push_back(std::size_t(j));
    }
  }
  return topo;
}

/// Graph-based output error of follower i:
/// sum_j a_ij (y_i - y_j) + b_i (y_i - y_r).
inline double consensus_error(const Topology& topo, std::span<const double> outputs, double reference, std::size_t i) {
  const std::size_t n = topo.n_followers();
  if (outputs.size() != n) throw ConfigError("outputs length does not match follower count");
  if (i >= n) throw std::out_of_range("follower index " + std::to_string(i) + " out of range");
  double z = 0.0;
  for (std::size_t j = 0; j < n; ++j) z += topo.a(i, j) * (outputs[i] - outputs[j]);
  return z + topo.b(i) * (outputs[i] - reference);
}

}  // namespace etmas
