#include "lipvor/network.hpp"

#include <cmath>
#include <fstream>

#include "lipvor/error.hpp"

namespace lipvor {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Identity: return "identity";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "identity") return Activation::Identity;
  throw Error(ErrorCode::UnsupportedActivation, "unknown activation '" + std::string(name) + "'");
}

namespace {
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }
}  // namespace

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Tanh: return std::tanh(z);
    case Activation::Sigmoid: return sigmoid(z);
    case Activation::Identity: return z;
  }
  return z;
}

double activate_d1(Activation a, double z) {
  switch (a) {
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
    case Activation::Sigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s);
    }
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

double activate_d2(Activation a, double z) {
  switch (a) {
    case Activation::Tanh: {
      const double t = std::tanh(z);
      return -2.0 * t * (1.0 - t * t);
    }
    case Activation::Sigmoid: {
      const double s = sigmoid(z);
      return s * (1.0 - s) * (1.0 - 2.0 * s);
    }
    case Activation::Identity: return 0.0;
  }
  return 0.0;
}

double sup_abs_second_derivative(Activation a) {
  switch (a) {
    // |2t(1-t^2)| peaks at t = 1/sqrt(3).
    case Activation::Tanh: return 4.0 / (3.0 * std::sqrt(3.0));
    // |s(1-s)(1-2s)| peaks at s = 1/2 +- 1/(2 sqrt 3).
    case Activation::Sigmoid: return 1.0 / (6.0 * std::sqrt(3.0));
    case Activation::Identity: return 0.0;
  }
  return 0.0;
}

double sup_abs_first_derivative(Activation a) {
  switch (a) {
    case Activation::Tanh: return 1.0;
    case Activation::Sigmoid: return 0.25;
    case Activation::Identity: return 1.0;
  }
  return 1.0;
}

Network::Network(int input_dim, std::vector<LayerSpec> layers)
    : input_dim_(input_dim), layers_(std::move(layers)) {
  if (input_dim_ < 1) throw Error(ErrorCode::MalformedModel, "input dimension must be positive");
  if (layers_.empty()) throw Error(ErrorCode::MalformedModel, "network has no layers");
  Eigen::Index fan_in = input_dim_;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.weights.rows() != fan_in)
      throw Error(ErrorCode::MalformedModel, "layer " + std::to_string(l) + " weight rows do not chain");
    if (layer.weights.cols() < 1 || layer.bias.size() != layer.weights.cols())
      throw Error(ErrorCode::MalformedModel, "layer " + std::to_string(l) + " bias length mismatch");
    if (!layer.weights.allFinite() || !layer.bias.allFinite())
      throw Error(ErrorCode::MalformedModel, "layer " + std::to_string(l) + " has non-finite entries");
    fan_in = layer.weights.cols();
  }
  if (fan_in != 1) throw Error(ErrorCode::MalformedModel, "network output must be scalar");
}

std::size_t Network::parameter_count() const {
  std::size_t count = 0;
  for (const auto& layer : layers_) count += layer.weights.size() + layer.bias.size();
  return count;
}

Eigen::VectorXd Network::parameters() const {
  Eigen::VectorXd out(parameter_count());
  Eigen::Index k = 0;
  for (const auto& layer : layers_) {
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) out[k++] = layer.weights(i, j);
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) out[k++] = layer.bias[j];
  }
  return out;
}

Network Network::with_parameters(const Eigen::VectorXd& params) const {
  if (static_cast<std::size_t>(params.size()) != parameter_count())
    throw Error(ErrorCode::DimensionMismatch, "parameter vector length mismatch");
  std::vector<LayerSpec> layers = layers_;
  Eigen::Index k = 0;
  for (auto& layer : layers) {
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index j = 0; j < layer.weights.cols(); ++j) layer.weights(i, j) = params[k++];
    for (Eigen::Index j = 0; j < layer.bias.size(); ++j) layer.bias[j] = params[k++];
  }
  return Network(input_dim_, std::move(layers));
}

namespace {

void check_input(const Network& net, const Point& x) {
  if (x.size() != net.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.size()) +
                                                  " entries, network expects " +
                                                  std::to_string(net.input_dim()));
}

Eigen::VectorXd apply(Activation a, const Eigen::VectorXd& z, double (*fn)(Activation, double)) {
  Eigen::VectorXd out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) out[k] = fn(a, z[k]);
  return out;
}

}  // namespace

ForwardTrace forward_trace(const Network& net, const Point& x) {
  check_input(net, x);
  ForwardTrace t;
  t.post.push_back(x);
  for (const auto& layer : net.layers()) {
    Eigen::VectorXd z = layer.weights.transpose() * t.post.back() + layer.bias;
    t.post.push_back(apply(layer.activation, z, activate));
    t.pre.push_back(std::move(z));
  }
  return t;
}

double forward(const Network& net, const Point& x) { return forward_trace(net, x).post.back()[0]; }

Eigen::VectorXd jacobian(const Network& net, const Point& x) {
  const ForwardTrace t = forward_trace(net, x);
  // J^l = J^{l-1} W^l diag(phi'(z^l)), J^0 = I.
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(net.input_dim(), net.input_dim());
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers()[l];
    j = (j * layer.weights) * apply(layer.activation, t.pre[l], activate_d1).asDiagonal();
  }
  return j.col(0);
}

Eigen::MatrixXd hessian(const Network& net, const Point& x) {
  const ForwardTrace t = forward_trace(net, x);
  const int n0 = net.input_dim();
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n0, n0);
  std::vector<Eigen::MatrixXd> prev;  // H^0 = 0
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers()[l];
    const Eigen::MatrixXd a = j * layer.weights;
    const Eigen::VectorXd d1 = apply(layer.activation, t.pre[l], activate_d1);
    const Eigen::VectorXd d2 = apply(layer.activation, t.pre[l], activate_d2);
    std::vector<Eigen::MatrixXd> next(a.cols());
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      Eigen::MatrixXd h = d2[k] * (a.col(k) * a.col(k).transpose());
      if (!prev.empty()) {
        Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(n0, n0);
        for (std::size_t m = 0; m < prev.size(); ++m) mixed += layer.weights(m, k) * prev[m];
        h += d1[k] * mixed;
      }
      next[k] = std::move(h);
    }
    prev = std::move(next);
    j = a * d1.asDiagonal();
  }
  return prev.front();
}

Eigen::VectorXd hessian_row(const Network& net, const Point& x, std::size_t r) {
  if (r >= static_cast<std::size_t>(net.input_dim()))
    throw Error(ErrorCode::IndexOutOfRange, "feature index out of range");
  const ForwardTrace t = forward_trace(net, x);
  const int n0 = net.input_dim();
  // j: J^l (n0 x n_l);  h: d^2 o^l / dx_r dx (n0 x n_l).
  Eigen::MatrixXd j = Eigen::MatrixXd::Identity(n0, n0);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n0, n0);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers()[l];
    const Eigen::MatrixXd a = j * layer.weights;
    const Eigen::VectorXd d1 = apply(layer.activation, t.pre[l], activate_d1);
    const Eigen::VectorXd d2 = apply(layer.activation, t.pre[l], activate_d2);
    const Eigen::VectorXd scale = d2.cwiseProduct(a.row(r).transpose());
    h = a * scale.asDiagonal() + (h * layer.weights) * d1.asDiagonal();
    j = a * d1.asDiagonal();
  }
  return h.col(0);
}

double partial_derivative(const Network& net, const Point& x, std::size_t r) {
  if (r >= static_cast<std::size_t>(net.input_dim()))
    throw Error(ErrorCode::IndexOutOfRange, "feature index out of range");
  return jacobian(net, x)[static_cast<Eigen::Index>(r)];
}

Network random_network(const std::vector<int>& dims, const std::vector<Activation>& activations,
                       std::mt19937_64& rng, double scale) {
  if (dims.size() < 2 || activations.size() + 1 != dims.size())
    throw Error(ErrorCode::InvalidArgument, "dims must list input and every layer width");
  std::vector<LayerSpec> layers;
  for (std::size_t l = 1; l < dims.size(); ++l) {
    const double bound = scale / std::sqrt(static_cast<double>(dims[l - 1]));
    std::uniform_real_distribution<double> u(-bound, bound);
    LayerSpec layer;
    layer.weights.resize(dims[l - 1], dims[l]);
    layer.bias.resize(dims[l]);
    for (Eigen::Index i = 0; i < layer.weights.rows(); ++i)
      for (Eigen::Index k = 0; k < layer.weights.cols(); ++k) layer.weights(i, k) = u(rng);
    for (Eigen::Index k = 0; k < layer.bias.size(); ++k) layer.bias[k] = u(rng);
    layer.activation = activations[l - 1];
    layers.push_back(std::move(layer));
  }
  return Network(dims.front(), std::move(layers));
}

nlohmann::json to_json(const Network& net) {
  nlohmann::json j;
  j["input_dim"] = net.input_dim();
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : net.layers()) {
    std::vector<double> w;
    w.reserve(layer.weights.size());
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) w.push_back(layer.weights(r, c));
    nlohmann::json lj;
    lj["rows"] = layer.weights.rows();
    lj["cols"] = layer.weights.cols();
    lj["weights"] = w;
    lj["bias"] = std::vector<double>(layer.bias.data(), layer.bias.data() + layer.bias.size());
    lj["activation"] = std::string(to_string(layer.activation));
    j["layers"].push_back(std::move(lj));
  }
  return j;
}

Network network_from_json(const nlohmann::json& j) {
  try {
    const int input_dim = j.at("input_dim").get<int>();
    std::vector<LayerSpec> layers;
    for (const auto& lj : j.at("layers")) {
      const auto rows = lj.at("rows").get<Eigen::Index>();
      const auto cols = lj.at("cols").get<Eigen::Index>();
      const auto w = lj.at("weights").get<std::vector<double>>();
      const auto b = lj.at("bias").get<std::vector<double>>();
      if (rows < 1 || cols < 1 || static_cast<Eigen::Index>(w.size()) != rows * cols)
        throw Error(ErrorCode::MalformedModel, "weights length does not match rows * cols");
      LayerSpec layer;
      layer.weights.resize(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) layer.weights(r, c) = w[r * cols + c];
      layer.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
      layer.activation = activation_from_string(lj.at("activation").get<std::string>());
      layers.push_back(std::move(layer));
    }
    return Network(input_dim, std::move(layers));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedModel, e.what());
  }
}

void save_network(const Network& net, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path);
  out << to_json(net).dump(2) << '\n';
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedModel, e.what());
  }
  return network_from_json(j);
}

}  // namespace lipvor
