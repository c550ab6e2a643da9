#pragma once

// Gaussian radial-basis-function networks and their adaptive weight law.
//
// Node j evaluates exp(-|input - c_j|^2 / b_j^2).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>

#include "etmas/errors.hpp"

namespace etmas {

class RbfLayout {
 public:
  /// centers: node_count x input_dim; widths: node_count, strictly positive.
  RbfLayout(Eigen::MatrixXd centers, Eigen::VectorXd widths) : centers_(std::move(centers)), widths_(std::move(widths)) {
    if (centers_.rows() < 1 || centers_.cols() < 1) throw ConfigError("rbf layout needs at least one node and input");
    if (widths_.size() != centers_.rows()) throw ConfigError("rbf widths must have one entry per node");
    if (!centers_.allFinite()) throw ConfigError("rbf centers must be finite");
    for (Eigen::Index j = 0; j < widths_.size(); ++j) {
      if (!(widths_(j) > 0.0) || !std::isfinite(widths_(j))) throw ConfigError("rbf widths must be positive");
    }
  }

  [[nodiscard]] std::size_t input_dim() const noexcept { return std::size_t(centers_.cols()); }
  [[nodiscard]] std::size_t node_count() const noexcept { return std::size_t(centers_.rows()); }
  [[nodiscard]] const Eigen::MatrixXd& centers() const noexcept { return centers_; }
  [[nodiscard]] const Eigen::VectorXd& widths() const noexcept { return widths_; }

 private:
  Eigen::MatrixXd centers_;
  Eigen::VectorXd widths_;
};

struct AdaptiveWeights {
  Eigen::VectorXd w_hat;

  [[nodiscard]] double norm() const { return w_hat.norm(); }
};

inline Eigen::VectorXd basis(const RbfLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& input) {
  if (std::size_t(input.size()) != layout.input_dim()) {
    throw ConfigError("rbf input has dimension " + std::to_string(input.size()) + ", layout expects " +
                      std::to_string(layout.input_dim()));
  }
  const auto& c = layout.centers();
  const auto& b = layout.widths();
  Eigen::VectorXd e(c.rows());
  for (Eigen::Index j = 0; j < c.rows(); ++j) {
    const double dist2 = (input.transpose() - c.row(j)).squaredNorm();
    e(j) = std::exp(-dist2 / (b(j) * b(j)));
  }
  return e;
}

inline double approximate(const RbfLayout& layout, const Eigen::Ref<const Eigen::VectorXd>& weights,
                          const Eigen::Ref<const Eigen::VectorXd>& input) {
  if (std::size_t(weights.size()) != layout.node_count()) throw ConfigError("weight count does not match rbf nodes");
  return weights.dot(basis(layout, input));
}

inline double approximate(const RbfLayout& layout, const AdaptiveWeights& weights,
                          const Eigen::Ref<const Eigen::VectorXd>& input) {
  return approximate(layout, weights.w_hat, input);
}

/// Leakage-modified law: -h W - eta * tau_err * kappa * E(x_hat prefix).
inline Eigen::VectorXd weight_update_rate(const Eigen::Ref<const Eigen::VectorXd>& weights, const RbfLayout& layout,
                                          const Eigen::Ref<const Eigen::VectorXd>& x_hat_prefix, double tau_tilde,
                                          double h, double eta, double kappa) {
  if (!(h > 0.0) || !(eta > 0.0) || !(kappa > 0.0)) throw ConfigError("weight law gains h, eta, kappa must be positive");
  if (std::size_t(weights.size()) != layout.node_count()) throw ConfigError("weight count does not match rbf nodes");
  return -h * weights - (eta * tau_tilde * kappa) * basis(layout, x_hat_prefix);
}

/// Regular grid over [lo, hi]^dim with `per_axis` nodes per axis and width
/// equal to the grid spacing. Nodes are ordered with the last axis fastest.
inline RbfLayout grid_layout(std::size_t dim, std::size_t per_axis, double lo, double hi) {
  if (dim == 0 || per_axis == 0) throw ConfigError("grid layout needs dim >= 1 and per_axis >= 1");
  if (!(hi > lo)) throw ConfigError("grid layout range must satisfy hi > lo");
  std::size_t count = 1;
  for (std::size_t d = 0; d < dim; ++d) count *= per_axis;
  const double spacing = per_axis > 1 ? (hi - lo) / double(per_axis - 1) : (hi - lo);
  Eigen::MatrixXd c(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t n = 0; n < count; ++n) {
    std::size_t rem = n;
    for (std::size_t d = dim; d-- > 0;) {
      const std::size_t k = rem % per_axis;
      rem /= per_axis;
      c(Eigen::Index(n), Eigen::Index(d)) = per_axis > 1 ? lo + spacing * double(k) : 0.5 * (lo + hi);
    }
  }
  return RbfLayout(std::move(c), Eigen::VectorXd::Constant(Eigen::Index(count), spacing));
}

/// Radical inverse of `index` in `base` (van der Corput).
inline double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / double(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * double(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// `count` Halton points over [lo, hi]^dim, starting at sequence index
/// `seed + 1`, all with the same width.
inline RbfLayout halton_layout(std::size_t dim, std::size_t count, double lo, double hi, double width,
                               std::uint64_t seed) {
  static constexpr std::array<std::uint64_t, 32> kPrimes{2,  3,  5,  7,  11, 13, 17, 19, 23, 29,  31,
                                                         37, 41, 43, 47, 53, 59, 61, 67, 71, 73,  79,
                                                         83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  if (dim == 0 || count == 0) throw ConfigError("halton layout needs dim >= 1 and count >= 1");
  if (dim > kPrimes.size()) throw ConfigError("halton layout supports at most 32 input dimensions");
  if (!(hi > lo)) throw ConfigError("halton layout range must satisfy hi > lo");
  Eigen::MatrixXd c(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t n = 0; n < count; ++n) {
    for (std::size_t d = 0; d < dim; ++d) {
      c(Eigen::Index(n), Eigen::Index(d)) = lo + (hi - lo) * radical_inverse(seed + n + 1, kPrimes[d]);
    }
  }
  return RbfLayout(std::move(c), Eigen::VectorXd::Constant(Eigen::Index(count), width));
}

}  // namespace etmas
