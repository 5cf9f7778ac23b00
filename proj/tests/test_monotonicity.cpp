#include <doctest.h>

#include <cmath>
#include <random>

#include "lipvor/error.hpp"
#include "lipvor/kernels.hpp"
#include "lipvor/monotonicity.hpp"

using namespace lipvor;

namespace {

Network single_neuron(double w) {
  return Network(1, {{Eigen::MatrixXd::Constant(1, 1, w), Eigen::VectorXd::Zero(1), Activation::Tanh}});
}

// tanh(x0) + tanh(6(x1 - 0.3)) - tanh(6(x1 - 0.7)): increasing in x0, a bump in x1.
Network mixed_net() {
  Eigen::MatrixXd w1(2, 3), w2(3, 1);
  w1 << 1, 0, 0, 0, 6, 6;
  w2 << 1, 1, -1;
  Eigen::VectorXd b1(3);
  b1 << 0, -1.8, -4.2;
  return Network(2, {{w1, b1, Activation::Tanh}, {w2, Eigen::VectorXd::Zero(1), Activation::Identity}});
}

// g(R x) with R reflecting coordinate r about the box centre (unit box).
Network reflect_input(const Network& net, std::size_t r) {
  auto layers = net.layers();
  const Eigen::RowVectorXd row = layers[0].weights.row(static_cast<Eigen::Index>(r));
  layers[0].bias += row.transpose();
  layers[0].weights.row(static_cast<Eigen::Index>(r)) = -row;
  return Network(net.input_dim(), layers);
}

Point P(double a, double b) { return Eigen::Vector2d(a, b); }

}  // namespace

TEST_CASE("constraint parsing") {
  const auto c = parse_constraint("2:dec:0.05");
  CHECK(c.feature == 2);
  CHECK(c.direction == Direction::Decreasing);
  CHECK(c.epsilon == 0.05);
  CHECK(c.sign() == -1.0);
  for (const char* bad : {"", "1", "1:inc", "x:inc:0.1", "1:up:0.1", "1:inc:zero", "1:inc:-0.1", "1:inc:0.1x"})
    CHECK_THROWS_AS(parse_constraint(bad), Error);
}

TEST_CASE("linear network certifies on the first check") {
  Eigen::MatrixXd w1(2, 2), w2(2, 1);
  w1 << 1, 0.5, 0.2, -1;
  w2 << 1, 0.5;
  const Network lin(2, {{w1, Eigen::VectorXd::Zero(2), Activation::Identity},
                        {w2, Eigen::VectorXd::Zero(1), Activation::Identity}});
  const auto rep = certify_monotonic(lin, {{0, Direction::Increasing, 0.1}}, BoxDomain::unit(2), {}, {});
  CHECK(rep.overall_status == MonotonicityStatus::CertifiedMonotonic);
  CHECK(rep.iterations_used == 0);
  CHECK(rep.lipschitz_estimates[0].bound == 0.0);
}

TEST_CASE("sign analysis of a single decreasing neuron") {
  const Network net = single_neuron(-2.0);
  const auto box = BoxDomain::unit(1);
  const auto inc = certify_monotonic(net, {{0, Direction::Increasing, 0.1}}, box, {}, {});
  CHECK(inc.overall_status == MonotonicityStatus::ViolationsFound);
  REQUIRE_FALSE(inc.per_feature.at(0).counterexamples.empty());
  CHECK(inc.per_feature.at(0).points_final.violation_flags[0]);
  const auto dec = certify_monotonic(net, {{0, Direction::Decreasing, 0.1}}, box, {}, {});
  CHECK(dec.overall_status == MonotonicityStatus::CertifiedMonotonic);
  const auto p = monotone_positivity_problem(net, {0, Direction::Decreasing, 0.1}, box);
  CHECK(p.evaluator(Eigen::VectorXd::Constant(1, 0.3)) == doctest::Approx(-partial_derivative(net, Eigen::VectorXd::Constant(1, 0.3), 0)));
  CHECK(p.lipschitz_constant == doctest::Approx(3.079201).epsilon(1e-6));
}

TEST_CASE("joint radius rules") {
  const std::vector<double> bounds{1.0, 1.0}, eps{0.1, 0.1};
  auto a = assess_joint(std::vector<double>{0.4, 0.2}, bounds, eps);
  CHECK(a.radius == 0.2);
  CHECK_FALSE(a.violating);
  a = assess_joint(std::vector<double>{-0.3, -0.5}, std::vector<double>{1.0, 2.0}, eps);
  CHECK(a.violating);
  CHECK(a.radius == 0.3);
  a = assess_joint(std::vector<double>{0.05, 0.4}, bounds, eps);
  CHECK(a.violating);
  CHECK(a.radius == 0.0);
  CHECK(a.value == 0.05);
}

TEST_CASE("one constraint reduces to plain certification") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 5; ++trial) {
    const Network net = random_network({2, 6, 1}, {Activation::Tanh, Activation::Identity}, rng);
    const MonotonicityConstraint c{static_cast<std::size_t>(trial % 2), Direction::Increasing, 0.05};
    MonotonicityOptions mo;
    mo.budget = 150;
    mo.seed = 5;
    const auto rep = certify_monotonic(net, {c}, BoxDomain::unit(2), {}, mo);
    const auto p = monotone_positivity_problem(net, c, BoxDomain::unit(2));
    CertifyOptions co;
    co.max_iter = 150;
    co.seed = 5;
    const Point centre = P(0.5, 0.5);
    const auto direct = certify(p, std::span<const Point>(&centre, 1), co);
    const auto& view = rep.per_feature.at(c.feature);
    CHECK(view.status == direct.status);
    CHECK(view.iterations_used == direct.iterations_used);
    REQUIRE(view.points_final.size() == direct.points_final.size());
    for (std::size_t j = 0; j < direct.points_final.size(); ++j)
      CHECK(view.points_final.points[j] == direct.points_final.points[j]);
  }
}

TEST_CASE("violations are attributed to the violated feature only") {
  const Network net = mixed_net();
  MonotonicityOptions mo;
  mo.budget = 400;
  const std::vector<MonotonicityConstraint> cons{{0, Direction::Increasing, 0.1}, {1, Direction::Increasing, 0.1}};
  const auto rep = certify_monotonic(net, cons, BoxDomain::unit(2), {}, mo);
  CHECK(rep.overall_status == MonotonicityStatus::ViolationsFound);
  CHECK(rep.per_feature.at(0).counterexamples.empty());
  REQUIRE_FALSE(rep.per_feature.at(1).counterexamples.empty());
  for (const auto& ce : rep.per_feature.at(1).counterexamples) {
    CHECK(partial_derivative(net, ce.point, 1) < 0.1);
    CHECK(partial_derivative(net, ce.point, 1) == ce.value);
  }
  mo.joint = false;
  const auto indep = certify_monotonic(net, cons, BoxDomain::unit(2), {}, mo);
  CHECK(indep.per_feature.at(0).status == CertificationStatus::CertifiedPositive);
  CHECK(indep.per_feature.at(1).status == CertificationStatus::CounterexamplesFound);
  CHECK(indep.overall_status == MonotonicityStatus::ViolationsFound);
}

TEST_CASE("decreasing equals increasing on the reflected network") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 5; ++trial) {
    const Network net = random_network({2, 5, 1}, {Activation::Tanh, Activation::Identity}, rng, 3.0);
    const Network mirrored = reflect_input(net, 0);
    MonotonicityOptions mo;
    mo.budget = 60;
    mo.seed = 9;
    const std::vector<Point> start{P(0.31, 0.57)}, start_mirror{P(1 - 0.31, 0.57)};
    const auto dec = certify_monotonic(net, {{0, Direction::Decreasing, 0.05}}, BoxDomain::unit(2), start, mo);
    const auto inc = certify_monotonic(mirrored, {{0, Direction::Increasing, 0.05}}, BoxDomain::unit(2), start_mirror, mo);
    CHECK(dec.overall_status == inc.overall_status);
    CHECK(dec.lipschitz_estimates[0].bound == doctest::Approx(inc.lipschitz_estimates[0].bound).epsilon(1e-12));
    CHECK(dec.per_feature.at(0).counterexamples.empty() == inc.per_feature.at(0).counterexamples.empty());
    // Trajectories can part ways at tie-breaks that rounding of 1 - x decides, so compare the problems.
    const auto pd = monotone_positivity_problem(net, {0, Direction::Decreasing, 0.05}, BoxDomain::unit(2));
    const auto pi = monotone_positivity_problem(mirrored, {0, Direction::Increasing, 0.05}, BoxDomain::unit(2));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
      const double x = u(rng), y = u(rng);
      CHECK(pd.evaluator(P(x, y)) == doctest::Approx(pi.evaluator(P(1 - x, y))).epsilon(1e-12));
    }
  }
}

TEST_CASE("certified verdicts hold on a 101-per-dim grid") {
  std::mt19937_64 rng(23);
  int certified = 0;
  for (int trial = 0; trial < 30; ++trial) {
    // Shift the output towards increasing in x0 so that some nets certify.
    auto layers = random_network({2, 4, 1}, {Activation::Tanh, Activation::Identity}, rng).layers();
    layers[0].weights.row(0) = layers[0].weights.row(0).cwiseAbs();
    layers[1].weights = layers[1].weights.cwiseAbs();
    const Network net(2, layers);
    MonotonicityOptions mo;
    mo.budget = 1500;
    const auto rep = certify_monotonic(net, {{0, Direction::Increasing, 0.01}}, BoxDomain::unit(2), {}, mo);
    if (rep.overall_status != MonotonicityStatus::CertifiedMonotonic) continue;
    ++certified;
    const auto [lo, at] = grid_minimum([&](const Point& x) { return partial_derivative(net, x, 0); }, BoxDomain::unit(2), 101);
    CHECK(lo > 0.0);
  }
  CHECK(certified > 5);
}

TEST_CASE("input validation") {
  const Network net = mixed_net();
  const auto box = BoxDomain::unit(2);
  CHECK_THROWS_AS(certify_monotonic(net, {}, box, {}, {}), Error);
  CHECK_THROWS_AS(certify_monotonic(net, {{2, Direction::Increasing, 0.1}}, box, {}, {}), Error);
  CHECK_THROWS_AS(certify_monotonic(net, {{0, Direction::Increasing, 0.1}, {0, Direction::Decreasing, 0.1}}, box, {}, {}), Error);
  CHECK_THROWS_AS(certify_monotonic(net, {{0, Direction::Increasing, 0.1}}, BoxDomain::unit(3), {}, {}), Error);
}
