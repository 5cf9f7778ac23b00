#include "lipvor/lipschitz.hpp"

#include <algorithm>
#include <cmath>

#include "lipvor/error.hpp"

namespace lipvor {

namespace {

// lambda_max(G) <= trace(G^p)^(1/p) for the Gram matrix G, with p = 2^40
// reached by trace-normalised squaring. Power iteration approaches sigma
// from below, so this is what makes the upper-bound mode sound.
double trace_power_bound(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd g = w.rows() < w.cols() ? Eigen::MatrixXd(w * w.transpose()) : Eigen::MatrixXd(w.transpose() * w);
  constexpr int kSquarings = 40;
  double log_scale = 0.0;  // log of trace(G^p) accumulated as sum 2^(m-k) log t_k
  for (int k = 0; k < kSquarings; ++k) {
    const double t = g.trace();
    if (!(t > 0.0)) return 0.0;
    g /= t;
    log_scale += std::ldexp(std::log(t), -k);  // contributes log(t) * 2^(m-k) / 2^m
    g = (g * g).eval();
  }
  const double t = g.trace();
  if (!(t > 0.0)) return std::exp(0.5 * log_scale);
  log_scale += std::ldexp(std::log(t), -kSquarings);
  return std::exp(0.5 * log_scale);
}

}  // namespace

double spectral_norm(const Eigen::MatrixXd& w, const SpectralNormOptions& options) {
  if (!(options.tol > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (w.size() == 0 || w.isZero(0.0)) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(w.cols()).normalized();
  Eigen::VectorXd wv = w * v;
  if (wv.squaredNorm() == 0.0) {
    // Start vector in the null space: fall back to the column of largest norm.
    Eigen::Index col = 0;
    w.colwise().norm().maxCoeff(&col);
    v.setZero();
    v[col] = 1.0;
    wv = w * v;
  }
  double sigma = wv.norm();
  for (int it = 0; it < options.max_iter; ++it) {
    Eigen::VectorXd next = w.transpose() * wv;
    const double nn = next.norm();
    if (nn == 0.0) break;
    v = next / nn;
    wv = w * v;
    const double updated = wv.norm();
    const bool converged = std::abs(updated - sigma) <= options.tol * updated;
    sigma = updated;
    if (converged) break;
  }
  if (!options.upper_bound) return sigma;
  return std::max(sigma, trace_power_bound(w)) * (1.0 + options.tol);
}

namespace {

struct LayerFactors {
  std::vector<double> norms;
  std::vector<double> second;
};

LayerFactors layer_factors(const Network& net, const ActivationBoundOverride& overrides) {
  LayerFactors f;
  SpectralNormOptions sn;
  sn.upper_bound = true;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const auto& layer = net.layers()[l];
    // The recursion bounds ||J^l|| by the product of weight norms, which
    // needs |phi'| <= 1.
    if (sup_abs_first_derivative(layer.activation) > 1.0)
      throw Error(ErrorCode::UnsupportedActivation, "activation slope exceeds 1");
    f.norms.push_back(spectral_norm(layer.weights, sn));
    double a = sup_abs_second_derivative(layer.activation);
    if (l < overrides.size() && overrides[l].has_value()) a = *overrides[l];
    if (!std::isfinite(a) || a < 0.0)
      throw Error(ErrorCode::UnsupportedActivation, "layer lacks a finite second-derivative bound");
    f.second.push_back(a);
  }
  return f;
}

LipschitzEstimate bound_from_factors(const Network& net, std::size_t r, const LayerFactors& f) {
  if (r >= static_cast<std::size_t>(net.input_dim()))
    throw Error(ErrorCode::IndexOutOfRange, "feature index out of range");
  LipschitzEstimate est;
  est.feature = r;
  est.layer_norms = f.norms;
  est.activation_bounds = f.second;
  est.row_norm = net.layers().front().weights.row(static_cast<Eigen::Index>(r)).norm();
  double previous = 0.0;
  double chain = est.row_norm * f.norms[0];  // ||W^1_r|| ||W^1|| prod ||W^i||^2
  for (std::size_t l = 0; l < net.depth(); ++l) {
    if (l > 0) chain *= f.norms[l] * f.norms[l];
    const double current = f.second[l] * chain + previous * f.norms[l];
    est.per_layer_partials.push_back(current);
    previous = current;
  }
  est.bound = previous;
  return est;
}

}  // namespace

LipschitzEstimate lipschitz_bound(const Network& net, std::size_t r, const ActivationBoundOverride& overrides) {
  return bound_from_factors(net, r, layer_factors(net, overrides));
}

std::vector<LipschitzEstimate> lipschitz_bounds(const Network& net, const std::vector<std::size_t>& features) {
  const LayerFactors f = layer_factors(net, {});
  std::vector<LipschitzEstimate> out;
  for (std::size_t r : features) out.push_back(bound_from_factors(net, r, f));
  return out;
}

double empirical_gradient_sup(const Network& net, std::size_t r, const BoxDomain& domain,
                              int grid_per_dim, Execution exec) {
  if (domain.dim() != net.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "domain and network dimensions differ");
  if (net.input_dim() > 4) throw Error(ErrorCode::DimensionTooHigh, "full grids are limited to 4 inputs");
  if (r >= static_cast<std::size_t>(net.input_dim()))
    throw Error(ErrorCode::IndexOutOfRange, "feature index out of range");
  auto norm_at = [&](const Point& x) { return hessian_row(net, x, r).norm(); };
  return grid_maximum(norm_at, domain, grid_per_dim, exec).first;
}

}  // namespace lipvor
