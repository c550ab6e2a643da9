#pragma once

#include <Eigen/Dense>

#include "etmas/graph.hpp"

namespace etmas::testing {

inline Eigen::MatrixXd benchmark_adjacency() {
  Eigen::MatrixXd a(4, 4);
  a << 0, 1, 0, 0,
       0, 0, 0, 0,
       0, 1, 0, 0,
       1, 0, 0, 0;
  return a;
}

inline Eigen::VectorXd benchmark_pinning() { return Eigen::Vector4d(0, 1, 0, 0); }

inline Topology benchmark_topology() { return Topology::build(benchmark_adjacency(), benchmark_pinning()); }

}  // namespace etmas::testing
