#pragma once

// Fully connected feed-forward network with scalar output,
//   z^l = o^{l-1} W^l + b^l,  o^l = phi^l(z^l),  o^0 = x,
// and exact input derivatives up to second order.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lipvor/geometry.hpp"

namespace lipvor {

enum class Activation { Tanh, Sigmoid, Identity };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view name);

double activate(Activation a, double z);
double activate_d1(Activation a, double z);
double activate_d2(Activation a, double z);

/// sup_z |phi''(z)|: 4/(3 sqrt 3) for tanh, 1/(6 sqrt 3) for the sigmoid.
double sup_abs_second_derivative(Activation a);
/// sup_z |phi'(z)|.
double sup_abs_first_derivative(Activation a);

struct LayerSpec {
  Eigen::MatrixXd weights;  // fan_in x fan_out
  Eigen::VectorXd bias;     // fan_out
  Activation activation = Activation::Tanh;
};

class Network {
 public:
  Network(int input_dim, std::vector<LayerSpec> layers);

  int input_dim() const { return input_dim_; }
  int output_dim() const { return static_cast<int>(layers_.back().bias.size()); }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t depth() const { return layers_.size(); }

  /// Flattened parameters: per layer, weights row-major then bias.
  std::size_t parameter_count() const;
  Eigen::VectorXd parameters() const;
  Network with_parameters(const Eigen::VectorXd& params) const;

 private:
  int input_dim_;
  std::vector<LayerSpec> layers_;
};

/// Pre-activations z^l and outputs o^l (o[0] = x).
struct ForwardTrace {
  std::vector<Eigen::VectorXd> pre;
  std::vector<Eigen::VectorXd> post;
};

ForwardTrace forward_trace(const Network& net, const Point& x);
double forward(const Network& net, const Point& x);

/// Gradient of the output w.r.t. the input (the n0 x 1 Jacobian).
Eigen::VectorXd jacobian(const Network& net, const Point& x);

/// n0 x n0 Hessian of the output, by the per-neuron recursion
///   H_k^l = phi''(z_k) A_k A_k^T + phi'(z_k) sum_m W_mk H_m^{l-1},  A = J^{l-1} W^l.
Eigen::MatrixXd hessian(const Network& net, const Point& x);

/// Row r of the Hessian, i.e. the gradient of d g / d x_r, computed without
/// forming the full tensor.
Eigen::VectorXd hessian_row(const Network& net, const Point& x, std::size_t r);

/// jacobian(net, x)[r].
double partial_derivative(const Network& net, const Point& x, std::size_t r);

/// Layers of sizes dims[1..], weights uniform in +-1/sqrt(fan_in).
Network random_network(const std::vector<int>& dims, const std::vector<Activation>& activations,
                       std::mt19937_64& rng, double scale = 1.0);

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace lipvor
