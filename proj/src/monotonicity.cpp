#include "lipvor/monotonicity.hpp"

#include <algorithm>
#include <charconv>
#include <set>
#include <string>

#include "lipvor/error.hpp"

namespace lipvor {

std::string_view to_string(Direction d) { return d == Direction::Increasing ? "increasing" : "decreasing"; }

std::string_view to_string(MonotonicityStatus s) {
  switch (s) {
    case MonotonicityStatus::CertifiedMonotonic: return "CertifiedMonotonic";
    case MonotonicityStatus::ViolationsFound: return "ViolationsFound";
    case MonotonicityStatus::Inconclusive: return "Inconclusive";
  }
  return "Unknown";
}

MonotonicityConstraint parse_constraint(std::string_view text) {
  const auto bad = [&] {
    return Error(ErrorCode::InvalidArgument, "constraint '" + std::string(text) + "' is not of the form r:inc|dec:eps");
  };
  const auto c1 = text.find(':');
  if (c1 == std::string_view::npos) throw bad();
  const auto c2 = text.find(':', c1 + 1);
  if (c2 == std::string_view::npos) throw bad();
  MonotonicityConstraint c;
  const auto feature = text.substr(0, c1);
  if (std::from_chars(feature.data(), feature.data() + feature.size(), c.feature).ec != std::errc{}) throw bad();
  const auto dir = text.substr(c1 + 1, c2 - c1 - 1);
  if (dir == "inc" || dir == "increasing") {
    c.direction = Direction::Increasing;
  } else if (dir == "dec" || dir == "decreasing") {
    c.direction = Direction::Decreasing;
  } else {
    throw bad();
  }
  try {
    std::size_t used = 0;
    const std::string eps(text.substr(c2 + 1));
    c.epsilon = std::stod(eps, &used);
    if (used != eps.size()) throw bad();
  } catch (const std::logic_error&) {
    throw bad();
  }
  if (!(c.epsilon > 0.0)) throw bad();
  return c;
}

PositivityProblem monotone_positivity_problem(const Network& net, const MonotonicityConstraint& c,
                                              const BoxDomain& domain) {
  if (c.feature >= static_cast<std::size_t>(net.input_dim()))
    throw Error(ErrorCode::IndexOutOfRange, "constraint feature out of range");
  if (!(c.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "constraint epsilon must be positive");
  PositivityProblem p;
  const double sign = c.sign();
  const std::size_t r = c.feature;
  p.evaluator = [net, sign, r](const Point& x) { return sign * partial_derivative(net, x, r); };
  p.lipschitz_constant = std::max(lipschitz_bound(net, r).bound, kLipschitzFloor);
  p.epsilon = c.epsilon;
  p.domain = domain;
  p.evaluator_thread_safe = true;
  return p;
}

PointAssessment assess_joint(std::span<const double> directed_values, std::span<const double> bounds,
                             std::span<const double> epsilons) {
  PointAssessment a;
  a.components.assign(directed_values.begin(), directed_values.end());
  double min_ratio = std::numeric_limits<double>::infinity();
  double max_violation = 0.0;
  double min_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < directed_values.size(); ++i) {
    const double v = directed_values[i];
    min_value = std::min(min_value, v);
    if (v < epsilons[i]) {
      a.violating = true;
      if (v < 0.0) max_violation = std::max(max_violation, -v / bounds[i]);
    } else {
      min_ratio = std::min(min_ratio, v / bounds[i]);
    }
  }
  a.value = min_value;
  a.radius = a.violating ? max_violation : min_ratio;
  return a;
}

namespace {

// Per-feature view of a joint run.
CertificationResult feature_view(const CertificationResult& joint, std::size_t i,
                                 const MonotonicityConstraint& c, double bound) {
  CertificationResult out;
  out.rng_seed = joint.rng_seed;
  out.iterations_used = joint.iterations_used;
  out.certified_fraction = joint.certified_fraction;
  out.points_final.points = joint.points_final.points;
  out.points_final.cells = joint.points_final.cells;
  for (std::size_t j = 0; j < joint.points_final.size(); ++j) {
    const double v = joint.points_final.component_values[j][i];
    const PointAssessment a = assess_scalar(v, bound, c.epsilon);
    out.points_final.values.push_back(v);
    out.points_final.radii.push_back(a.radius);
    out.points_final.violation_flags.push_back(a.violating);
    if (a.violating) out.counterexamples.push_back({joint.points_final.points[j], v});
  }
  if (!out.counterexamples.empty()) {
    out.status = CertificationStatus::CounterexamplesFound;
  } else if (joint.status == CertificationStatus::CertifiedPositive) {
    out.status = CertificationStatus::CertifiedPositive;
  } else {
    out.status = CertificationStatus::BudgetExhausted;
  }
  return out;
}

}  // namespace

MonotonicityReport certify_monotonic(const Network& net, const std::vector<MonotonicityConstraint>& constraints,
                                     const BoxDomain& domain, std::span<const Point> initial_points,
                                     const MonotonicityOptions& options) {
  if (constraints.empty()) throw Error(ErrorCode::InvalidArgument, "no constraints");
  if (domain.dim() != net.input_dim()) throw Error(ErrorCode::DimensionMismatch, "domain and network dimensions differ");
  std::set<std::size_t> seen;
  std::vector<std::size_t> features;
  for (const auto& c : constraints) {
    if (c.feature >= static_cast<std::size_t>(net.input_dim()))
      throw Error(ErrorCode::IndexOutOfRange, "constraint feature out of range");
    if (!(c.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "constraint epsilon must be positive");
    if (!seen.insert(c.feature).second) throw Error(ErrorCode::InvalidArgument, "duplicate constraint feature");
    features.push_back(c.feature);
  }

  MonotonicityReport report;
  report.constraints = constraints;
  report.joint = options.joint;
  report.lipschitz_estimates = lipschitz_bounds(net, features);

  std::vector<Point> start(initial_points.begin(), initial_points.end());
  if (start.empty()) start.push_back(domain.center());

  CertifyOptions co;
  co.max_iter = options.budget;
  co.exploration_p = options.exploration_p;
  co.seed = options.seed;
  co.fraction_samples = options.fraction_samples;
  co.exec = options.exec;
  co.trace = options.trace;

  std::vector<double> bounds, epsilons, signs;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    bounds.push_back(std::max(report.lipschitz_estimates[i].bound, kLipschitzFloor));
    epsilons.push_back(constraints[i].epsilon);
    signs.push_back(constraints[i].sign());
  }

  if (options.joint) {
    Assessor assess = [&](const Point& x) {
      const Eigen::VectorXd grad = jacobian(net, x);
      std::vector<double> directed(constraints.size());
      for (std::size_t i = 0; i < constraints.size(); ++i)
        directed[i] = signs[i] * grad[static_cast<Eigen::Index>(constraints[i].feature)];
      return assess_joint(directed, bounds, epsilons);
    };
    const CertificationResult joint = certify_assessed(assess, true, domain, start, co);
    report.iterations_used = joint.iterations_used;
    for (std::size_t i = 0; i < constraints.size(); ++i)
      report.per_feature.emplace(constraints[i].feature, feature_view(joint, i, constraints[i], bounds[i]));
    report.overall_status = joint.status == CertificationStatus::CertifiedPositive
                                ? MonotonicityStatus::CertifiedMonotonic
                                : (joint.counterexamples.empty() ? MonotonicityStatus::Inconclusive
                                                                 : MonotonicityStatus::ViolationsFound);
    return report;
  }

  bool all_certified = true;
  bool any_violation = false;
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    PositivityProblem p = monotone_positivity_problem(net, constraints[i], domain);
    p.lipschitz_constant = bounds[i];
    CertificationResult r = certify(p, start, co);
    report.iterations_used += r.iterations_used;
    all_certified = all_certified && r.status == CertificationStatus::CertifiedPositive;
    any_violation = any_violation || r.status == CertificationStatus::CounterexamplesFound;
    report.per_feature.emplace(constraints[i].feature, std::move(r));
  }
  report.overall_status = all_certified ? MonotonicityStatus::CertifiedMonotonic
                                        : (any_violation ? MonotonicityStatus::ViolationsFound
                                                         : MonotonicityStatus::Inconclusive);
  return report;
}

}  // namespace lipvor
