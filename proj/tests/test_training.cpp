#include <doctest.h>

#include <cmath>
#include <random>

#include "lipvor/error.hpp"
#include "lipvor/kernels.hpp"
#include "lipvor/training.hpp"
#include "oracles.hpp"

using namespace lipvor;

namespace {

Network tanh_net(std::vector<int> dims, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::vector<Activation> acts(dims.size() - 2, Activation::Tanh);
  acts.push_back(Activation::Identity);
  return random_network(dims, acts, rng, scale);
}

Dataset make_dataset(std::size_t n, int dim, const std::function<double(const Point&)>& target, double noise,
                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> g(0.0, 1.0);
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(n), dim);
  d.targets.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (int c = 0; c < dim; ++c) d.inputs(static_cast<Eigen::Index>(i), c) = u(rng);
    d.targets[static_cast<Eigen::Index>(i)] = target(d.input(i)) + noise * g(rng);
  }
  assign_splits(d, 0.2, 0.2, rng);
  return d;
}

// Monotone in both inputs, fairly flat in x0.
double monotone_target(const Point& x) { return 0.1 * x[0] + std::sin(1.5 * x[1]); }

TrainingConfig quick_config() {
  TrainingConfig c;
  c.max_epochs = 1500;
  c.patience = 200;
  return c;
}

}  // namespace

TEST_CASE("penalty hinge values") {
  Eigen::MatrixXd w(1, 1);
  w << 0.0;
  const Network flat(1, {{w, Eigen::VectorXd::Zero(1), Activation::Identity}});
  const std::vector<Point> one{Eigen::VectorXd::Constant(1, 0.4)};
  CHECK(monotonic_penalty(flat, one, std::vector<MonotonicityConstraint>{{0, Direction::Increasing, 0.1}}) ==
        doctest::Approx(0.1));
  w << 2.0;
  const Network steep(1, {{w, Eigen::VectorXd::Zero(1), Activation::Identity}});
  CHECK(monotonic_penalty(steep, one, std::vector<MonotonicityConstraint>{{0, Direction::Increasing, 0.1}}) == 0.0);
  CHECK(monotonic_penalty(steep, one, std::vector<MonotonicityConstraint>{{0, Direction::Decreasing, 0.1}}) ==
        doctest::Approx(2.1));
}

TEST_CASE("penalty matches a finite-difference Jacobian sum") {
  const Network net = tanh_net({3, 6, 5, 1}, 31, 1.5);
  std::mt19937_64 rng(32);
  const auto pts = oracle::random_points(20, BoxDomain::unit(3), rng);
  const std::vector<MonotonicityConstraint> cons{{0, Direction::Increasing, 0.1}, {2, Direction::Decreasing, 0.2}};
  double expected = 0.0;
  for (const auto& x : pts) {
    const Eigen::VectorXd j = oracle::fd_gradient([&](const Point& p) { return forward(net, p); }, x, 1e-6);
    expected += std::max(0.0, -j[0] + 0.1) + std::max(0.0, j[2] + 0.2);
  }
  CHECK(monotonic_penalty(net, pts, cons) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("analytic penalty gradient matches central differences over weights") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 8; ++trial) {
    const bool deep = trial % 2 == 1;
    const Network net = deep ? tanh_net({2, 5, 4, 1}, 40 + trial, 1.5) : tanh_net({3, 7, 1}, 40 + trial, 1.5);
    const auto pts = oracle::random_points(15, BoxDomain::unit(net.input_dim()), rng);
    const std::vector<MonotonicityConstraint> cons{{0, Direction::Increasing, 0.3}, {1, Direction::Decreasing, 0.3}};
    const double lambda = 0.1;
    const Eigen::VectorXd analytic = lambda * monotonic_penalty_gradient(net, pts, cons);
    const Eigen::VectorXd theta = net.parameters();
    Eigen::VectorXd numeric(theta.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      Eigen::VectorXd a = theta, b = theta;
      a[i] += h;
      b[i] -= h;
      numeric[i] = lambda * (monotonic_penalty(net.with_parameters(a), pts, cons) -
                             monotonic_penalty(net.with_parameters(b), pts, cons)) / (2 * h);
    }
    REQUIRE(numeric.norm() > 0);
    CHECK((analytic - numeric).norm() / numeric.norm() < 1e-4);
    const Eigen::VectorXd fd_mode = lambda * monotonic_penalty_gradient(net, pts, cons, PenaltyGradientMode::FiniteDifference);
    CHECK((fd_mode - numeric).norm() / numeric.norm() < 1e-4);
  }
}

TEST_CASE("output gradient seed matches central differences") {
  const Network net = tanh_net({2, 4, 3, 1}, 50, 1.2);
  const Point x = Eigen::Vector2d(0.3, 0.8);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.parameter_count()));
  accumulate_parameter_gradient(net, x, 1.0, 0, 0.0, g);
  const Eigen::VectorXd theta = net.parameters();
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd a = theta, b = theta;
    a[i] += 1e-6;
    b[i] -= 1e-6;
    const double fd = (forward(net.with_parameters(a), x) - forward(net.with_parameters(b), x)) / 2e-6;
    CHECK(g[i] == doctest::Approx(fd).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("linear regression sanity") {
  Dataset d = make_dataset(40, 1, [](const Point& x) { return 2.0 * x[0]; }, 0.0, 60);
  Eigen::MatrixXd w(1, 1);
  w << 0.1;
  const Network start(1, {{w, Eigen::VectorXd::Zero(1), Activation::Identity}});
  TrainingConfig c;
  c.lambda = 0.0;
  c.max_epochs = 3000;
  c.patience = 3000;
  c.learning_rate = 0.05;
  const auto res = train(start, d, {}, c);
  CHECK(res.net.layers()[0].weights(0, 0) == doctest::Approx(2.0).epsilon(1e-3));
  CHECK(res.report.train.mae < 1e-3);
  CHECK(res.report.test.mae < 1e-3);
}

TEST_CASE("penalised training on monotone data") {
  const Dataset d = make_dataset(80, 2, monotone_target, 0.02, 61);
  const Network start = tanh_net({2, 8, 1}, 62);
  const std::vector<MonotonicityConstraint> cons{{0, Direction::Increasing, 0.1}};
  TrainingConfig c = quick_config();
  const auto penalised = train(start, d, cons, c);
  c.lambda = 0.0;
  const auto baseline = train(start, d, cons, c);
  REQUIRE(penalised.report.eligible_checkpoint);
  CHECK(penalised.report.final_train_penalty == 0.0);
  CHECK(penalised.report.train.mae < baseline.report.train.mae + 0.05);
}

TEST_CASE("returned checkpoints have zero training penalty") {
  const Dataset d = make_dataset(60, 2, monotone_target, 0.05, 63);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    TrainingConfig c = quick_config();
    c.seed = seed;
    c.epsilon = 0.2;
    const auto res = train(tanh_net({2, 6, 1}, 70 + seed, 2.0), d, {{0, Direction::Increasing, 0.1}}, c);
    if (!res.report.eligible_checkpoint) continue;
    CHECK(res.report.history[res.report.best_epoch].penalty == 0.0);
    CHECK(res.report.final_train_penalty == 0.0);
    if (res.report.early_stop_reason == "patience") CHECK(res.report.epochs_run == res.report.best_epoch + c.patience + 1);
  }
}

TEST_CASE("training is reproducible") {
  const Dataset d = make_dataset(50, 2, monotone_target, 0.05, 64);
  TrainingConfig c = quick_config();
  c.max_epochs = 300;
  c.patience = 300;
  const Network start = tanh_net({2, 5, 1}, 65);
  const auto a = train(start, d, {{1, Direction::Increasing, 0.1}}, c);
  const auto b = train(start, d, {{1, Direction::Increasing, 0.1}}, c);
  REQUIRE(a.report.history.size() == b.report.history.size());
  for (std::size_t e = 0; e < a.report.history.size(); ++e) {
    CHECK(a.report.history[e].total == b.report.history[e].total);
    CHECK(a.report.history[e].val_total == b.report.history[e].val_total);
  }
  CHECK(a.net.parameters() == b.net.parameters());
}

TEST_CASE("fine-tuning removes violations at counter-examples") {
  const Dataset d = make_dataset(80, 2, monotone_target, 0.02, 66);
  const std::vector<MonotonicityConstraint> cons{{0, Direction::Increasing, 0.1}};
  TrainingConfig c = quick_config();
  c.lambda = 0.0;
  const auto loose = train(tanh_net({2, 8, 1}, 67, 2.0), d, {}, c);
  std::vector<Point> bad;
  for (int i = 0; i <= 20; ++i)
    for (int j = 0; j <= 20; ++j) {
      const Point x = Eigen::Vector2d(i / 20.0, j / 20.0);
      if (partial_derivative(loose.net, x, 0) < 0.1) bad.push_back(x);
    }
  REQUIRE_FALSE(bad.empty());
  c.lambda = 0.1;
  const auto tuned = finetune_with_counterexamples(loose.net, d, bad, cons, c);
  REQUIRE(tuned.report.eligible_checkpoint);
  CHECK(monotonic_penalty(tuned.net, bad, cons) == 0.0);
  CHECK(std::abs(tuned.report.test.mae - loose.report.test.mae) < 0.5 * loose.report.test.mae);
}

TEST_CASE("satisfied counter-examples leave training unchanged") {
  const Dataset d = make_dataset(40, 1, [](const Point& x) { return x[0]; }, 0.0, 68);
  Eigen::MatrixXd w(1, 1);
  w << 1.0;
  const Network start(1, {{w, Eigen::VectorXd::Zero(1), Activation::Identity}});
  TrainingConfig c = quick_config();
  c.max_epochs = 100;
  c.patience = 100;
  const std::vector<MonotonicityConstraint> cons{{0, Direction::Increasing, 0.1}};
  const std::vector<Point> fine{Eigen::VectorXd::Constant(1, 0.5)};
  const auto a = train(start, d, cons, c);
  const auto b = finetune_with_counterexamples(start, d, fine, cons, c);
  REQUIRE(a.report.history.size() == b.report.history.size());
  for (std::size_t e = 0; e < a.report.history.size(); ++e) CHECK(a.report.history[e].total == b.report.history[e].total);
}

TEST_CASE("configuration and data validation") {
  TrainingConfig c;
  c.patience = c.max_epochs + 1;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.learning_rate = 0;
  CHECK_THROWS_AS(validate_config(c), Error);
  c = {};
  c.lambda = -1;
  CHECK_THROWS_AS(validate_config(c), Error);
  Dataset d = make_dataset(10, 1, [](const Point& x) { return x[0]; }, 0.0, 69);
  CHECK_NOTHROW(validate_dataset(d, nullptr));
  d.test.push_back(d.train.front());
  CHECK_THROWS_AS(validate_dataset(d, nullptr), Error);
  Dataset outside = make_dataset(10, 1, [](const Point& x) { return x[0]; }, 0.0, 69);
  outside.inputs(0, 0) = 1.5;
  const auto box = BoxDomain::unit(1);
  CHECK_THROWS_AS(validate_dataset(outside, &box), Error);
}

TEST_CASE("loop stops at once for a monotone network") {
  const Dataset d = make_dataset(20, 1, [](const Point& x) { return x[0]; }, 0.0, 70);
  Eigen::MatrixXd w(1, 1);
  w << 1.0;
  const Network net(1, {{w, Eigen::VectorXd::Zero(1), Activation::Identity}});
  LoopOptions lo;
  lo.initial_training = false;
  const auto res = certify_train_loop(net, d, {{0, Direction::Increasing, 0.1}}, BoxDomain::unit(1), quick_config(), lo);
  REQUIRE(res.rounds.size() == 1);
  CHECK_FALSE(res.rounds[0].finetuned);
  CHECK_FALSE(res.rounds[0].trained);
  CHECK(res.report.overall_status == MonotonicityStatus::CertifiedMonotonic);
}

TEST_CASE("adversarial target is never falsely certified") {
  const Dataset d = make_dataset(60, 1, [](const Point& x) { return std::sin(4 * M_PI * x[0]); }, 0.0, 71);
  TrainingConfig fit = quick_config();
  fit.lambda = 0.0;
  fit.max_epochs = 4000;
  fit.patience = 4000;
  fit.learning_rate = 0.02;
  // Unconstrained fit: the early-stopping rule only restricts checkpoints when constraints are given.
  const Network wiggly = train(tanh_net({1, 10, 1}, 72), d, {}, fit).net;
  const auto wiggly_min = grid_minimum([&](const Point& x) { return partial_derivative(wiggly, x, 0); },
                                       BoxDomain::unit(1), 2001);
  REQUIRE(wiggly_min.first < 0.0);
  for (bool initial_training : {false, true}) {
    LoopOptions lo;
    lo.max_rounds = 2;
    lo.initial_training = initial_training;
    lo.certify.budget = 500;
    const auto res = certify_train_loop(wiggly, d, {{0, Direction::Increasing, 0.1}}, BoxDomain::unit(1),
                                        quick_config(), lo);
    const auto [lo_val, at] = grid_minimum([&](const Point& x) { return partial_derivative(res.net, x, 0); },
                                           BoxDomain::unit(1), 2001);
    if (res.report.overall_status == MonotonicityStatus::CertifiedMonotonic) {
      CHECK(lo_val > 0.0);
    } else {
      CHECK(res.rounds.size() == 2);
    }
    if (!initial_training) CHECK(res.rounds[0].status == MonotonicityStatus::ViolationsFound);
    for (std::size_t k = 0; k < res.rounds.size(); ++k) CHECK(res.rounds[k].round == k + 1);
    if (res.rounds.size() == 2) {
      CHECK(res.rounds[1].finetuned);
      CHECK(res.rounds[1].counterexamples_used == res.rounds[0].new_counterexamples);
    }
  }
}
