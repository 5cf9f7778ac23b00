#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "lipvor/geometry.hpp"
#include "lipvor/kernels.hpp"
#include "lipvor/network.hpp"

namespace lipvor {

/// Recursive upper bound on the Lipschitz constant of d g / d x_r.
struct LipschitzEstimate {
  std::size_t feature = 0;
  double bound = 0.0;
  std::vector<double> per_layer_partials;  // bound after layers 1..K
  std::vector<double> layer_norms;         // ||W^l||_2
  double row_norm = 0.0;                   // ||row r of W^1||_2
  std::vector<double> activation_bounds;   // sup |phi''| per layer
};

struct SpectralNormOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  /// Inflate the estimate by (1 + tol) so that it can be used as an upper bound.
  bool upper_bound = false;
};

/// Largest singular value by power iteration on W^T W from the normalized
/// all-ones vector.
double spectral_norm(const Eigen::MatrixXd& w, const SpectralNormOptions& options = {});

/// Per-layer override of sup |phi''| (nullopt entries use the activation's).
using ActivationBoundOverride = std::vector<std::optional<double>>;

/// L^l = a^l ||W^1_r|| ||W^1|| prod_{i=2..l} ||W^i||^2 + L^{l-1} ||W^l||,  L^0 = 0.
LipschitzEstimate lipschitz_bound(const Network& net, std::size_t r,
                                  const ActivationBoundOverride& overrides = {});

/// One estimate per feature, sharing the spectral norms.
std::vector<LipschitzEstimate> lipschitz_bounds(const Network& net, const std::vector<std::size_t>& features);

/// max over a regular grid of ||grad d g / d x_r||, a lower bound on the true
/// Lipschitz constant of the partial derivative. Limited to input_dim <= 4.
double empirical_gradient_sup(const Network& net, std::size_t r, const BoxDomain& domain,
                              int grid_per_dim, Execution exec = Execution::Parallel);

}  // namespace lipvor
