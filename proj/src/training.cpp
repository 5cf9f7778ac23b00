#include "lipvor/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "lipvor/error.hpp"

namespace lipvor {

std::vector<Point> Dataset::points(std::span<const std::size_t> rows) const {
  std::vector<Point> out;
  out.reserve(rows.size());
  for (std::size_t i : rows) out.push_back(input(i));
  return out;
}

void validate_dataset(const Dataset& data, const BoxDomain* domain) {
  const std::size_t n = data.size();
  if (static_cast<std::size_t>(data.targets.size()) != n)
    throw Error(ErrorCode::DimensionMismatch, "inputs and targets differ in length");
  std::vector<int> seen(n, 0);
  for (const auto* split : {&data.train, &data.validation, &data.test})
    for (std::size_t i : *split) {
      if (i >= n) throw Error(ErrorCode::IndexOutOfRange, "split index out of range");
      ++seen[i];
    }
  for (int s : seen)
    if (s != 1) throw Error(ErrorCode::InvalidArgument, "splits must partition the rows");
  if (data.train.empty()) throw Error(ErrorCode::InvalidArgument, "empty training split");
  if (domain) {
    if (data.inputs.cols() != domain->dim())
      throw Error(ErrorCode::DimensionMismatch, "input width differs from the domain dimension");
    for (std::size_t i = 0; i < n; ++i)
      if (!domain->contains(data.input(i), kFeasibilityTolerance))
        throw Error(ErrorCode::PointOutsideDomain, "sample " + std::to_string(i) + " outside the domain");
  }
}

void assign_splits(Dataset& data, double first_holdout, double second_holdout, std::mt19937_64& rng) {
  if (!(first_holdout >= 0 && first_holdout < 1 && second_holdout >= 0 && second_holdout < 1))
    throw Error(ErrorCode::InvalidArgument, "holdout fractions must lie in [0, 1)");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<std::size_t>(std::llround(first_holdout * static_cast<double>(order.size())));
  const std::size_t rest = order.size() - n_test;
  const auto n_val = static_cast<std::size_t>(std::llround(second_holdout * static_cast<double>(rest)));
  data.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  data.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                         order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val));
  data.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test + n_val), order.end());
  for (auto* s : {&data.train, &data.validation, &data.test}) std::sort(s->begin(), s->end());
}

void validate_config(const TrainingConfig& c) {
  if (!(c.learning_rate > 0) || !std::isfinite(c.learning_rate))
    throw Error(ErrorCode::InvalidArgument, "learning_rate must be positive");
  if (!(c.weight_decay >= 0)) throw Error(ErrorCode::InvalidArgument, "weight_decay must be non-negative");
  if (!(c.lambda >= 0)) throw Error(ErrorCode::InvalidArgument, "lambda must be non-negative");
  if (!(c.epsilon >= 0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be non-negative");
  if (c.max_epochs == 0) throw Error(ErrorCode::InvalidArgument, "max_epochs must be positive");
  if (c.patience > c.max_epochs) throw Error(ErrorCode::InvalidArgument, "patience exceeds max_epochs");
}

namespace {

void check_constraints(const Network& net, std::span<const MonotonicityConstraint> constraints) {
  for (const auto& c : constraints)
    if (c.feature >= static_cast<std::size_t>(net.input_dim()))
      throw Error(ErrorCode::IndexOutOfRange, "constraint feature out of range");
}

double hinge(const MonotonicityConstraint& c, double partial) { return std::max(0.0, -c.sign() * partial + c.epsilon); }

double squared_error_mean(const Network& net, const Dataset& data, std::span<const std::size_t> rows) {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i : rows) {
    const double e = forward(net, data.input(i)) - data.targets[static_cast<Eigen::Index>(i)];
    s += e * e;
  }
  return s / static_cast<double>(rows.size());
}

}  // namespace

double monotonic_penalty(const Network& net, std::span<const Point> points,
                         std::span<const MonotonicityConstraint> constraints) {
  check_constraints(net, constraints);
  double total = 0.0;
  for (const auto& x : points) {
    if (constraints.empty()) break;
    const Eigen::VectorXd grad = jacobian(net, x);
    for (const auto& c : constraints) total += hinge(c, grad[static_cast<Eigen::Index>(c.feature)]);
  }
  return total;
}

void accumulate_parameter_gradient(const Network& net, const Point& x, double seed_output, std::size_t r,
                                   double seed_partial, Eigen::VectorXd& grad) {
  const auto& layers = net.layers();
  const std::size_t depth = layers.size();
  if (static_cast<std::size_t>(grad.size()) != net.parameter_count())
    throw Error(ErrorCode::DimensionMismatch, "gradient buffer has the wrong size");
  if (r >= static_cast<std::size_t>(net.input_dim()))
    throw Error(ErrorCode::IndexOutOfRange, "feature index out of range");

  // Primal pass with the tangent of x_r carried alongside.
  std::vector<Eigen::VectorXd> out(depth + 1), pre(depth), tan_out(depth + 1), tan_pre(depth);
  out[0] = x;
  tan_out[0] = Eigen::VectorXd::Zero(x.size());
  tan_out[0][static_cast<Eigen::Index>(r)] = 1.0;
  for (std::size_t l = 0; l < depth; ++l) {
    const auto& L = layers[l];
    pre[l] = L.weights.transpose() * out[l] + L.bias;
    tan_pre[l] = L.weights.transpose() * tan_out[l];
    out[l + 1] = pre[l].unaryExpr([&](double z) { return activate(L.activation, z); });
    tan_out[l + 1] = pre[l].unaryExpr([&](double z) { return activate_d1(L.activation, z); }).cwiseProduct(tan_pre[l]);
  }

  std::vector<std::size_t> offset(depth);
  std::size_t off = 0;
  for (std::size_t l = 0; l < depth; ++l) {
    offset[l] = off;
    off += static_cast<std::size_t>(layers[l].weights.size() + layers[l].bias.size());
  }

  Eigen::VectorXd adj_out = Eigen::VectorXd::Constant(1, seed_output);
  Eigen::VectorXd adj_tan = Eigen::VectorXd::Constant(1, seed_partial);
  for (std::size_t l = depth; l-- > 0;) {
    const auto& L = layers[l];
    const Eigen::VectorXd d1 = pre[l].unaryExpr([&](double z) { return activate_d1(L.activation, z); });
    const Eigen::VectorXd d2 = pre[l].unaryExpr([&](double z) { return activate_d2(L.activation, z); });
    const Eigen::VectorXd adj_tan_pre = d1.cwiseProduct(adj_tan);
    const Eigen::VectorXd adj_pre = d2.cwiseProduct(tan_pre[l]).cwiseProduct(adj_tan) + d1.cwiseProduct(adj_out);

    const Eigen::Index rows = L.weights.rows(), cols = L.weights.cols();
    double* g = grad.data() + offset[l];
    for (Eigen::Index m = 0; m < rows; ++m)
      for (Eigen::Index k = 0; k < cols; ++k)
        g[m * cols + k] += out[l][m] * adj_pre[k] + tan_out[l][m] * adj_tan_pre[k];
    g += rows * cols;
    for (Eigen::Index k = 0; k < cols; ++k) g[k] += adj_pre[k];

    adj_out = L.weights * adj_pre;
    adj_tan = L.weights * adj_tan_pre;
  }
}

Eigen::VectorXd monotonic_penalty_gradient(const Network& net, std::span<const Point> points,
                                           std::span<const MonotonicityConstraint> constraints,
                                           PenaltyGradientMode mode) {
  check_constraints(net, constraints);
  const std::size_t P = net.parameter_count();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P));
  if (mode == PenaltyGradientMode::FiniteDifference) {
    constexpr double h = 1e-5;
    const Eigen::VectorXd theta = net.parameters();
    for (std::size_t i = 0; i < P; ++i) {
      Eigen::VectorXd plus = theta, minus = theta;
      plus[static_cast<Eigen::Index>(i)] += h;
      minus[static_cast<Eigen::Index>(i)] -= h;
      grad[static_cast<Eigen::Index>(i)] = (monotonic_penalty(net.with_parameters(plus), points, constraints) -
                                            monotonic_penalty(net.with_parameters(minus), points, constraints)) /
                                           (2 * h);
    }
    return grad;
  }
  for (const auto& x : points) {
    if (constraints.empty()) break;
    const Eigen::VectorXd jac = jacobian(net, x);
    for (const auto& c : constraints)
      if (hinge(c, jac[static_cast<Eigen::Index>(c.feature)]) > 0.0)
        accumulate_parameter_gradient(net, x, 0.0, c.feature, -c.sign(), grad);
  }
  return grad;
}

SplitMetrics evaluate_split(const Network& net, const Dataset& data, std::span<const std::size_t> rows) {
  SplitMetrics m;
  if (rows.empty()) return m;
  double mean = 0.0;
  for (std::size_t i : rows) mean += data.targets[static_cast<Eigen::Index>(i)];
  mean /= static_cast<double>(rows.size());
  double sse = 0.0, sae = 0.0, sst = 0.0;
  for (std::size_t i : rows) {
    const double y = data.targets[static_cast<Eigen::Index>(i)];
    const double e = forward(net, data.input(i)) - y;
    sse += e * e;
    sae += std::abs(e);
    sst += (y - mean) * (y - mean);
  }
  const double n = static_cast<double>(rows.size());
  m.mse = sse / n;
  m.mae = sae / n;
  m.r2 = sst > 0 ? 1.0 - sse / sst : 0.0;
  return m;
}

namespace {

TrainResult train_impl(const Network& start, const Dataset& data, std::span<const Point> extra,
                       const std::vector<MonotonicityConstraint>& constraints, const TrainingConfig& config) {
  validate_config(config);
  validate_dataset(data);
  if (data.inputs.cols() != start.input_dim())
    throw Error(ErrorCode::DimensionMismatch, "dataset width differs from the network input");
  check_constraints(start, constraints);

  std::vector<MonotonicityConstraint> cons = constraints;
  for (auto& c : cons) c.epsilon = config.epsilon;

  std::vector<Point> penalty_points = data.points(data.train);
  penalty_points.insert(penalty_points.end(), extra.begin(), extra.end());
  const std::vector<Point> val_points = data.points(data.validation);

  const Eigen::Index P = static_cast<Eigen::Index>(start.parameter_count());
  Eigen::VectorXd theta = start.parameters();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(P), m2 = Eigen::VectorXd::Zero(P);
  constexpr double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

  TrainResult res{start, {}};
  TrainingReport& rep = res.report;
  Eigen::VectorXd best_theta;
  double best_val = std::numeric_limits<double>::infinity();
  std::size_t since_improvement = 0;
  const double n_train = static_cast<double>(data.train.size());

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    const Network net = start.with_parameters(theta);

    EpochLog log;
    log.epoch = epoch;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(P);
    for (std::size_t i : data.train) {
      const Point x = data.input(i);
      const double e = forward(net, x) - data.targets[static_cast<Eigen::Index>(i)];
      log.base_loss += e * e;
      accumulate_parameter_gradient(net, x, 2.0 * e / n_train, 0, 0.0, grad);
    }
    log.base_loss /= n_train;
    log.penalty = monotonic_penalty(net, penalty_points, cons);
    log.total = log.base_loss + config.lambda * log.penalty;
    if (config.lambda > 0 && log.penalty > 0)
      grad += config.lambda * monotonic_penalty_gradient(net, penalty_points, cons, config.penalty_gradient_mode);
    log.val_base = squared_error_mean(net, data, data.validation);
    log.val_penalty = monotonic_penalty(net, val_points, cons);
    log.val_total = log.val_base + config.lambda * log.val_penalty;
    rep.history.push_back(log);
    rep.epochs_run = epoch + 1;

    if (!std::isfinite(log.total)) {
      rep.early_stop_reason = "non-finite loss";
      break;
    }
    if (log.penalty == 0.0 && log.val_total < best_val) {
      best_val = log.val_total;
      best_theta = theta;
      rep.best_epoch = epoch;
      rep.eligible_checkpoint = true;
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (rep.eligible_checkpoint && since_improvement >= config.patience) {
      rep.early_stop_reason = "patience";
      break;
    }

    grad += config.weight_decay * theta;
    if (config.optimizer == Optimizer::Adam) {
      const double t = static_cast<double>(epoch + 1);
      m1 = beta1 * m1 + (1 - beta1) * grad;
      m2 = beta2 * m2 + (1 - beta2) * grad.cwiseProduct(grad);
      const double c1 = 1 - std::pow(beta1, t), c2 = 1 - std::pow(beta2, t);
      theta.array() -= config.learning_rate * (m1.array() / c1) / ((m2.array() / c2).sqrt() + adam_eps);
    } else {
      theta -= config.learning_rate * grad;
    }
  }
  if (rep.early_stop_reason.empty()) rep.early_stop_reason = "max_epochs";

  if (rep.eligible_checkpoint) {
    res.net = start.with_parameters(best_theta);
  } else {
    // No epoch met the constraints at every penalty point.
    res.net = rep.early_stop_reason == "non-finite loss" ? start : start.with_parameters(theta);
    rep.best_epoch = rep.epochs_run - 1;
    if (rep.early_stop_reason == "max_epochs") rep.early_stop_reason = "max_epochs (no eligible checkpoint)";
  }
  rep.final_train_penalty = monotonic_penalty(res.net, penalty_points, cons);
  rep.train = evaluate_split(res.net, data, data.train);
  rep.validation = evaluate_split(res.net, data, data.validation);
  rep.test = evaluate_split(res.net, data, data.test);
  return res;
}

}  // namespace

TrainResult train(const Network& net, const Dataset& data, const std::vector<MonotonicityConstraint>& constraints,
                  const TrainingConfig& config) {
  return train_impl(net, data, {}, constraints, config);
}

TrainResult finetune_with_counterexamples(const Network& net, const Dataset& data,
                                          std::span<const Point> counterexamples,
                                          const std::vector<MonotonicityConstraint>& constraints,
                                          const TrainingConfig& config) {
  return train_impl(net, data, counterexamples, constraints, config);
}

LoopResult certify_train_loop(const Network& net, const Dataset& data,
                              const std::vector<MonotonicityConstraint>& constraints, const BoxDomain& domain,
                              const TrainingConfig& config, const LoopOptions& options) {
  if (options.max_rounds == 0) throw Error(ErrorCode::InvalidArgument, "max_rounds must be positive");
  validate_dataset(data, &domain);
  std::vector<MonotonicityConstraint> cons = constraints;
  for (auto& c : cons) c.epsilon = config.epsilon;

  LoopResult out{net, {}, {}};
  std::vector<Point> counterexamples;
  std::vector<Point> start_points = data.points(data.train);
  if (options.initial_points_limit > 0 && start_points.size() > options.initial_points_limit)
    start_points.resize(options.initial_points_limit);

  for (std::size_t round = 1; round <= options.max_rounds; ++round) {
    RoundLog log;
    log.round = round;
    if (round == 1 && options.initial_training) {
      auto tr = train(out.net, data, cons, config);
      out.net = tr.net;
      log.trained = true;
      log.training = std::move(tr.report);
    } else if (round > 1) {
      auto tr = finetune_with_counterexamples(out.net, data, counterexamples, cons, config);
      out.net = tr.net;
      log.finetuned = true;
      log.counterexamples_used = counterexamples.size();
      log.training = std::move(tr.report);
    }

    MonotonicityOptions mo = options.certify;
    mo.seed = options.certify.seed + (round - 1);
    out.report = certify_monotonic(out.net, cons, domain, start_points, mo);
    log.status = out.report.overall_status;
    log.lipvor_iterations = out.report.iterations_used;
    for (const auto& est : out.report.lipschitz_estimates) log.lipschitz_bounds.push_back(est.bound);
    double frac = 1.0;
    for (const auto& [feature, result] : out.report.per_feature) frac = std::min(frac, result.certified_fraction);
    log.certified_fraction = out.report.per_feature.empty() ? 0.0 : frac;

    std::set<std::vector<double>> known;
    for (const auto& p : counterexamples) known.insert(std::vector<double>(p.data(), p.data() + p.size()));
    for (const auto& [feature, result] : out.report.per_feature)
      for (const auto& ce : result.counterexamples)
        if (known.insert(std::vector<double>(ce.point.data(), ce.point.data() + ce.point.size())).second) {
          counterexamples.push_back(ce.point);
          ++log.new_counterexamples;
        }
    out.rounds.push_back(std::move(log));
    if (out.report.overall_status == MonotonicityStatus::CertifiedMonotonic) break;
  }
  return out;
}

}  // namespace lipvor
