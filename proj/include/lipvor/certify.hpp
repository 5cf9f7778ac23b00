#pragma once

// Positivity certification of a Lipschitz black box over a box domain.
//
// Each evaluated point p carries a ball of radius |f(p)|/L on which the sign
// of f is known. The domain is certified positive once every point is
// epsilon-positive and each Voronoi cell lies strictly inside its
// generator's ball. Otherwise the furthest vertex of a selected uncovered
// cell is evaluated next.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "lipvor/geometry.hpp"
#include "lipvor/kernels.hpp"

namespace lipvor {

using Rng = std::mt19937_64;

/// A selected vertex closer than this to an evaluated point is skipped in
/// favour of the next candidate. Radius-zero cells (values in [0, eps)) are
/// never covered, so without a floor they are split until they fall below
/// the feasibility tolerance of the cell clipper.
inline constexpr double kMinPointSeparation = 1e-7;

struct PositivityProblem {
  std::function<double(const Point&)> evaluator;
  double lipschitz_constant = 1.0;
  double epsilon = 0.1;
  BoxDomain domain = BoxDomain::unit(1);
  /// Set when the evaluator may be called from several threads at once.
  bool evaluator_thread_safe = false;
};

enum class CertificationStatus { CertifiedPositive, CounterexamplesFound, BudgetExhausted };
std::string_view to_string(CertificationStatus status);

struct Counterexample {
  Point point;
  double value = 0.0;
};

struct CertificationState {
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<double> radii;
  std::vector<VoronoiCell> cells;
  std::vector<bool> violation_flags;
  /// Per-point component values when several constraints share one run
  /// (empty for a single positivity problem).
  std::vector<std::vector<double>> component_values;

  std::size_t size() const { return points.size(); }
  bool any_violation() const;
  bool covered(std::size_t j) const { return cells[j].furthest_distance < radii[j]; }
};

struct CertificationResult {
  CertificationStatus status = CertificationStatus::BudgetExhausted;
  std::vector<Counterexample> counterexamples;
  std::size_t iterations_used = 0;
  CertificationState points_final;
  double certified_fraction = 0.0;
  std::uint64_t rng_seed = 0;
};

/// What the engine needs to know about one evaluated point.
struct PointAssessment {
  double value = 0.0;
  double radius = 0.0;
  bool violating = false;
  std::vector<double> components;
};

using Assessor = std::function<PointAssessment(const Point&)>;

struct IterationEvent {
  std::size_t iteration;  // 0 for initial points
  std::size_t index;      // position of the point in the state
};

struct CertifyOptions {
  std::size_t max_iter = 1000;
  double exploration_p = 0.1;
  std::uint64_t seed = 0;
  std::size_t fraction_samples = 100000;
  Execution exec = Execution::Parallel;
  /// JSON-lines trace sink (one object per evaluated point).
  std::ostream* trace = nullptr;
  /// Observer called after the initial evaluation and after every insertion.
  std::function<void(const CertificationState&, std::size_t iteration)> on_iteration;
};

/// |value| / L.
double positivity_radius(double value, double lipschitz_constant);

/// Radius rule for a scalar evaluation: value/L when value >= epsilon,
/// |value|/L when value < 0, and 0 in between.
PointAssessment assess_scalar(double value, double lipschitz_constant, double epsilon);

/// True iff every cell lies strictly inside its generator's ball. Throws
/// ViolationPresent when any point is flagged.
bool global_condition(const CertificationState& state);

/// Candidate cells (furthest_distance >= radius) in selection order: largest
/// radius first when exploiting, smallest when exploring; ties by fewest
/// covering balls at the furthest vertex, then lexicographic vertex order.
std::vector<std::size_t> rank_candidates(const CertificationState& state, bool explore);

/// One draw from `rng` decides exploration; returns the furthest vertex of
/// the top-ranked candidate. Throws AllCovered when nothing is expandable.
Point select_next_vertex(const CertificationState& state, double exploration_p, Rng& rng);

CertificationResult certify(const PositivityProblem& problem, std::span<const Point> initial_points,
                            const CertifyOptions& options);

/// Engine shared by scalar and multi-constraint certification.
CertificationResult certify_assessed(const Assessor& assess, bool assess_thread_safe,
                                     const BoxDomain& domain, std::span<const Point> initial_points,
                                     const CertifyOptions& options);

/// ceil of (2(aL + eps) / (sqrt(pi) eps))^n Gamma(n/2 + 1), a the longest side.
std::uint64_t iteration_bound(const BoxDomain& domain, double epsilon, double lipschitz_constant);

/// Closed-form value before rounding.
double iteration_bound_real(const BoxDomain& domain, double epsilon, double lipschitz_constant);

/// Vol(box + B(eps/2L)) / Vol(B(eps/2L)), with the Minkowski-sum volume from
/// the Steiner formula of a box.
double volume_ratio_bound(const BoxDomain& domain, double epsilon, double lipschitz_constant);

double unit_ball_volume(int dim);

/// Monte-Carlo fraction of the box inside the union of the balls of
/// non-violating points.
double certified_fraction(const CertificationState& state, const BoxDomain& domain,
                          std::size_t n_samples, std::uint64_t seed,
                          Execution exec = Execution::Parallel);

}  // namespace lipvor
