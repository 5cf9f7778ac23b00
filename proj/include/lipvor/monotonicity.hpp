#pragma once

#include <cstdint>
#include <map>
#include <string_view>
#include <vector>

#include "lipvor/certify.hpp"
#include "lipvor/lipschitz.hpp"
#include "lipvor/network.hpp"

namespace lipvor {

enum class Direction { Increasing, Decreasing };
std::string_view to_string(Direction d);

struct MonotonicityConstraint {
  std::size_t feature = 0;
  Direction direction = Direction::Increasing;
  double epsilon = 0.1;

  double sign() const { return direction == Direction::Increasing ? 1.0 : -1.0; }
};

/// Parses "r:inc:0.1" / "r:dec:0.05".
MonotonicityConstraint parse_constraint(std::string_view text);

enum class MonotonicityStatus { CertifiedMonotonic, ViolationsFound, Inconclusive };
std::string_view to_string(MonotonicityStatus s);

struct MonotonicityReport {
  std::map<std::size_t, CertificationResult> per_feature;
  MonotonicityStatus overall_status = MonotonicityStatus::Inconclusive;
  std::vector<LipschitzEstimate> lipschitz_estimates;
  std::vector<MonotonicityConstraint> constraints;
  bool joint = true;
  std::size_t iterations_used = 0;
};

/// Bounds below this are clamped; a linear net has a constant derivative and
/// one positive sample then certifies the whole box.
inline constexpr double kLipschitzFloor = 1e-12;

/// Positivity problem for the directed derivative sign * d g / d x_r.
PositivityProblem monotone_positivity_problem(const Network& net, const MonotonicityConstraint& c,
                                              const BoxDomain& domain);

struct MonotonicityOptions {
  std::size_t budget = 1000;
  double exploration_p = 0.1;
  std::uint64_t seed = 0;
  /// Shared point set across constraints; false runs each feature on its own.
  bool joint = true;
  std::size_t fraction_samples = 100000;
  Execution exec = Execution::Parallel;
  std::ostream* trace = nullptr;
};

/// Joint rule at a point with directed values v_i and bounds L_i: if every
/// v_i >= eps_i the radius is min v_i / L_i; otherwise it is the largest
/// |v_i| / L_i over constraints with v_i < 0 (zero when none is negative).
PointAssessment assess_joint(std::span<const double> directed_values, std::span<const double> bounds,
                             std::span<const double> epsilons);

/// `initial_points` defaults to the box centre when empty.
MonotonicityReport certify_monotonic(const Network& net, const std::vector<MonotonicityConstraint>& constraints,
                                     const BoxDomain& domain, std::span<const Point> initial_points,
                                     const MonotonicityOptions& options);

}  // namespace lipvor
