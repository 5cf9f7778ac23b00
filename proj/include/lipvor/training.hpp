#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lipvor/monotonicity.hpp"
#include "lipvor/network.hpp"

namespace lipvor {

struct Dataset {
  Eigen::MatrixXd inputs;  // rows = samples
  Eigen::VectorXd targets;
  std::vector<std::size_t> train, validation, test;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  Point input(std::size_t i) const { return inputs.row(static_cast<Eigen::Index>(i)).transpose(); }
  std::vector<Point> points(std::span<const std::size_t> rows) const;
};

/// Throws unless the splits are disjoint, exhaustive and in range, and (when
/// given) every input lies in `domain`.
void validate_dataset(const Dataset& data, const BoxDomain* domain = nullptr);

/// Shuffles [0, n) and holds out round(first * n) rows for test, then
/// round(second * rest) of the remainder for validation.
void assign_splits(Dataset& data, double first_holdout, double second_holdout, std::mt19937_64& rng);

enum class Optimizer { Adam, Sgd };
enum class PenaltyGradientMode { Analytic, FiniteDifference };

struct TrainingConfig {
  Optimizer optimizer = Optimizer::Adam;
  double learning_rate = 0.01;
  double weight_decay = 0.0;
  std::size_t max_epochs = 5000;
  std::size_t patience = 1000;
  double lambda = 0.1;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  PenaltyGradientMode penalty_gradient_mode = PenaltyGradientMode::Analytic;
};

void validate_config(const TrainingConfig& config);

struct EpochLog {
  std::size_t epoch = 0;
  double base_loss = 0.0;
  double penalty = 0.0;
  double total = 0.0;
  double val_base = 0.0;
  double val_penalty = 0.0;
  double val_total = 0.0;
};

struct SplitMetrics {
  double mse = 0.0;
  double mae = 0.0;
  double r2 = 0.0;
};

struct TrainingReport {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  bool eligible_checkpoint = false;
  std::string early_stop_reason;
  std::vector<EpochLog> history;
  SplitMetrics train, validation, test;
  double final_train_penalty = 0.0;
};

/// sum over points and constraints of max(0, -sign * dg/dx_r + eps).
double monotonic_penalty(const Network& net, std::span<const Point> points,
                         std::span<const MonotonicityConstraint> constraints);

/// Gradient of monotonic_penalty w.r.t. the flattened parameters.
Eigen::VectorXd monotonic_penalty_gradient(const Network& net, std::span<const Point> points,
                                           std::span<const MonotonicityConstraint> constraints,
                                           PenaltyGradientMode mode = PenaltyGradientMode::Analytic);

/// d/dtheta [seed_output * g(x) + seed_partial * dg/dx_r] by reverse mode
/// through the forward-mode tangent of x_r, accumulated into `grad`.
void accumulate_parameter_gradient(const Network& net, const Point& x, double seed_output,
                                   std::size_t r, double seed_partial, Eigen::VectorXd& grad);

SplitMetrics evaluate_split(const Network& net, const Dataset& data, std::span<const std::size_t> rows);

struct TrainResult {
  Network net;
  TrainingReport report;
};

/// Full-batch minimisation of MSE(train) + lambda * penalty(train). Only epochs
/// whose training penalty is exactly zero may become the returned checkpoint.
TrainResult train(const Network& net, const Dataset& data,
                  const std::vector<MonotonicityConstraint>& constraints, const TrainingConfig& config);

/// As train(), with the penalty also enforced at `counterexamples`.
TrainResult finetune_with_counterexamples(const Network& net, const Dataset& data,
                                          std::span<const Point> counterexamples,
                                          const std::vector<MonotonicityConstraint>& constraints,
                                          const TrainingConfig& config);

struct RoundLog {
  std::size_t round = 0;
  bool trained = false;
  bool finetuned = false;
  std::size_t counterexamples_used = 0;
  MonotonicityStatus status = MonotonicityStatus::Inconclusive;
  std::size_t lipvor_iterations = 0;
  std::size_t new_counterexamples = 0;
  std::vector<double> lipschitz_bounds;
  double certified_fraction = 0.0;
  TrainingReport training;
};

struct LoopOptions {
  std::size_t max_rounds = 3;
  /// Train from `net` before the first certification.
  bool initial_training = true;
  /// LipVor starts from the first this-many training inputs (0 = all).
  std::size_t initial_points_limit = 0;
  MonotonicityOptions certify;
};

struct LoopResult {
  Network net;
  MonotonicityReport report;
  std::vector<RoundLog> rounds;
};

/// Certify; on failure fine-tune on every counter-example found so far and
/// certify again, up to max_rounds certification attempts.
LoopResult certify_train_loop(const Network& net, const Dataset& data,
                              const std::vector<MonotonicityConstraint>& constraints, const BoxDomain& domain,
                              const TrainingConfig& config, const LoopOptions& options);

}  // namespace lipvor
