#include "lipvor/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <nlohmann/json.hpp>

#include "lipvor/error.hpp"
#include "lipvor/voronoi.hpp"

namespace lipvor {

std::string_view to_string(CertificationStatus status) {
  switch (status) {
    case CertificationStatus::CertifiedPositive: return "CertifiedPositive";
    case CertificationStatus::CounterexamplesFound: return "CounterexamplesFound";
    case CertificationStatus::BudgetExhausted: return "BudgetExhausted";
  }
  return "Unknown";
}

bool CertificationState::any_violation() const {
  return std::find(violation_flags.begin(), violation_flags.end(), true) != violation_flags.end();
}

double positivity_radius(double value, double lipschitz_constant) {
  if (!(lipschitz_constant > 0.0))
    throw Error(ErrorCode::NonPositiveLipschitz, "Lipschitz constant must be positive");
  return std::abs(value) / lipschitz_constant;
}

PointAssessment assess_scalar(double value, double lipschitz_constant, double epsilon) {
  PointAssessment a;
  a.value = value;
  a.violating = value < epsilon;
  a.radius = (value >= epsilon || value < 0.0) ? positivity_radius(value, lipschitz_constant) : 0.0;
  return a;
}

bool global_condition(const CertificationState& state) {
  if (state.any_violation())
    throw Error(ErrorCode::ViolationPresent, "covering condition is undefined with violating points");
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (!state.covered(j)) return false;
  }
  return true;
}

namespace {

// Uncovered cells by radius (descending, or ascending when exploring), then by
// furthest vertex.
std::vector<std::size_t> sorted_uncovered(const CertificationState& state, bool explore) {
  std::vector<std::size_t> order;
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (!state.covered(j)) order.push_back(j);
  }
  const auto& cells = state.cells;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (state.radii[a] != state.radii[b])
      return explore ? state.radii[a] < state.radii[b] : state.radii[a] > state.radii[b];
    return lexicographic_less(cells[a].furthest_vertex, cells[b].furthest_vertex);
  });
  return order;
}

std::size_t radius_group_end(const CertificationState& state, const std::vector<std::size_t>& order,
                             std::size_t begin) {
  std::size_t end = begin + 1;
  while (end < order.size() && state.radii[order[end]] == state.radii[order[begin]]) ++end;
  return end;
}

template <class Count>
void order_group_by_count(std::vector<std::size_t>& order, std::size_t begin, std::size_t end, Count&& count) {
  if (end - begin < 2) return;
  std::vector<std::pair<std::size_t, std::size_t>> keyed;
  for (std::size_t k = begin; k < end; ++k) keyed.emplace_back(count(order[k]), order[k]);
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  for (std::size_t k = begin; k < end; ++k) order[k] = keyed[k - begin].second;
}

}  // namespace

std::vector<std::size_t> rank_candidates(const CertificationState& state, bool explore) {
  auto order = sorted_uncovered(state, explore);
  // Covering counts only matter inside groups of equal radius.
  for (std::size_t begin = 0; begin < order.size();) {
    const std::size_t end = radius_group_end(state, order, begin);
    order_group_by_count(order, begin, end, [&](std::size_t j) {
      return covered_count(state.cells[j].furthest_vertex, state.points, state.radii, j);
    });
    begin = end;
  }
  return order;
}

namespace {

bool draw_exploration(double exploration_p, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return unit(rng) < exploration_p;
}

}  // namespace

Point select_next_vertex(const CertificationState& state, double exploration_p, Rng& rng) {
  const bool explore = draw_exploration(exploration_p, rng);
  const auto order = rank_candidates(state, explore);
  if (order.empty()) throw Error(ErrorCode::AllCovered, "every cell is covered");
  return state.cells[order.front()].furthest_vertex;
}

namespace {

PointAssessment checked_assess(const Assessor& assess, const Point& x) {
  PointAssessment a;
  try {
    a = assess(x);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::EvaluationFailure, e.what());
  }
  if (!std::isfinite(a.value) || !std::isfinite(a.radius) || a.radius < 0.0)
    throw Error(ErrorCode::EvaluationFailure, "black box returned a non-finite value");
  return a;
}

void emit_trace(std::ostream* out, const CertificationState& state, std::size_t iteration,
                std::size_t j) {
  if (out == nullptr) return;
  nlohmann::json line;
  line["iteration"] = iteration;
  line["index"] = j;
  line["point"] = std::vector<double>(state.points[j].data(), state.points[j].data() + state.points[j].size());
  line["value"] = state.values[j];
  line["radius"] = state.radii[j];
  line["violating"] = static_cast<bool>(state.violation_flags[j]);
  line["covered"] = state.covered(j);
  *out << line.dump() << '\n';
}

// Per-cell covered count and duplicate flag of the furthest vertex. Points and
// radii never change once added, so a cell whose vertex has not moved only
// needs the points appended since it was last looked at.
class CandidateMemo {
 public:
  std::size_t covered(const CertificationState& state, std::size_t j) { return refresh(state, j).covered; }
  bool blocked(const CertificationState& state, std::size_t j) { return refresh(state, j).blocked; }

 private:
  struct Entry {
    Point vertex;
    std::size_t seen = 0;
    std::size_t covered = 0;
    bool blocked = false;
  };

  const Entry& refresh(const CertificationState& state, std::size_t j) {
    if (entries_.size() < state.size()) entries_.resize(state.size());
    Entry& e = entries_[j];
    const Point& v = state.cells[j].furthest_vertex;
    if (e.vertex.size() != v.size() || e.vertex != v) e = Entry{v};
    for (std::size_t l = e.seen; l < state.size(); ++l) {
      const double d = (state.points[l] - v).norm();
      if (d < kMinPointSeparation) e.blocked = true;
      if (l != j && d <= state.radii[l]) ++e.covered;
    }
    e.seen = state.size();
    return e;
  }

  std::vector<Entry> entries_;
};

// First vertex in rank_candidates order that keeps its distance from every
// evaluated point; ranks one radius group at a time.
const Point* next_candidate(const CertificationState& state, bool explore, CandidateMemo& memo) {
  auto order = sorted_uncovered(state, explore);
  for (std::size_t begin = 0; begin < order.size();) {
    const std::size_t end = radius_group_end(state, order, begin);
    order_group_by_count(order, begin, end, [&](std::size_t j) { return memo.covered(state, j); });
    for (std::size_t k = begin; k < end; ++k)
      if (!memo.blocked(state, order[k])) return &state.cells[order[k]].furthest_vertex;
    begin = end;
  }
  return nullptr;
}

void append(CertificationState& state, const Point& p, PointAssessment a) {
  state.points.push_back(p);
  state.values.push_back(a.value);
  state.radii.push_back(a.radius);
  state.violation_flags.push_back(a.violating);
  if (!a.components.empty()) state.component_values.push_back(std::move(a.components));
}

}  // namespace

CertificationResult certify_assessed(const Assessor& assess, bool assess_thread_safe,
                                     const BoxDomain& domain, std::span<const Point> initial_points,
                                     const CertifyOptions& options) {
  if (initial_points.empty()) throw Error(ErrorCode::InvalidArgument, "no initial points");
  if (!(options.exploration_p >= 0.0 && options.exploration_p <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "exploration probability must lie in [0, 1]");
  for (const auto& p : initial_points) {
    if (p.size() != domain.dim()) throw Error(ErrorCode::DimensionMismatch, "initial point dimension");
    if (!domain.contains(p)) throw Error(ErrorCode::PointOutsideDomain, "initial point outside the domain");
  }

  Rng rng(options.seed);
  CertificationResult result;
  result.rng_seed = options.seed;
  CertificationState& state = result.points_final;

  std::vector<PointAssessment> first(initial_points.size());
  parallel_for(initial_points.size(), assess_thread_safe ? options.exec : Execution::Serial,
               [&](std::size_t i) { first[i] = checked_assess(assess, initial_points[i]); });
  std::vector<Point> generators(initial_points.begin(), initial_points.end());
  state.cells = compute_cells(generators, domain, options.exec);
  for (std::size_t i = 0; i < generators.size(); ++i) append(state, generators[i], std::move(first[i]));
  for (std::size_t j = 0; j < state.size(); ++j) emit_trace(options.trace, state, 0, j);
  if (options.on_iteration) options.on_iteration(state, 0);

  bool certified = false;
  std::size_t iteration = 0;
  CandidateMemo memo;
  while (true) {
    if (!state.any_violation() && global_condition(state)) {
      certified = true;
      break;
    }
    if (iteration >= options.max_iter) break;

    const bool explore = draw_exploration(options.exploration_p, rng);
    const Point* next = next_candidate(state, explore, memo);
    if (next == nullptr) break;

    Point p = *next;
    PointAssessment a = checked_assess(assess, p);
    append(state, p, std::move(a));
    extend_diagram(state.points, state.cells, domain, options.exec);
    ++iteration;
    emit_trace(options.trace, state, iteration, state.size() - 1);
    if (options.on_iteration) options.on_iteration(state, iteration);
  }

  result.iterations_used = iteration;
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (state.violation_flags[j]) result.counterexamples.push_back({state.points[j], state.values[j]});
  }
  if (certified) {
    result.status = CertificationStatus::CertifiedPositive;
  } else if (!result.counterexamples.empty()) {
    result.status = CertificationStatus::CounterexamplesFound;
  } else {
    result.status = CertificationStatus::BudgetExhausted;
  }
  if (options.fraction_samples > 0) {
    result.certified_fraction =
        certified_fraction(state, domain, options.fraction_samples, options.seed, options.exec);
  }
  return result;
}

CertificationResult certify(const PositivityProblem& problem, std::span<const Point> initial_points,
                            const CertifyOptions& options) {
  if (!(problem.lipschitz_constant > 0.0))
    throw Error(ErrorCode::NonPositiveLipschitz, "Lipschitz constant must be positive");
  if (!(problem.epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!problem.evaluator) throw Error(ErrorCode::InvalidArgument, "missing evaluator");
  const double lip = problem.lipschitz_constant;
  const double eps = problem.epsilon;
  const auto& f = problem.evaluator;
  Assessor assess = [&f, lip, eps](const Point& x) { return assess_scalar(f(x), lip, eps); };
  return certify_assessed(assess, problem.evaluator_thread_safe, problem.domain, initial_points, options);
}

double unit_ball_volume(int dim) {
  const double half = 0.5 * dim;
  return std::pow(M_PI, half) / std::tgamma(half + 1.0);
}

double iteration_bound_real(const BoxDomain& domain, double epsilon, double lipschitz_constant) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!(lipschitz_constant > 0.0))
    throw Error(ErrorCode::NonPositiveLipschitz, "Lipschitz constant must be positive");
  const int n = domain.dim();
  const double a = domain.max_side();
  const double base = 2.0 * (a * lipschitz_constant + epsilon) / (std::sqrt(M_PI) * epsilon);
  return std::pow(base, n) * std::tgamma(0.5 * n + 1.0);
}

std::uint64_t iteration_bound(const BoxDomain& domain, double epsilon, double lipschitz_constant) {
  const double bound = std::ceil(iteration_bound_real(domain, epsilon, lipschitz_constant));
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  if (!(bound < static_cast<double>(kMax))) return kMax;
  return static_cast<std::uint64_t>(bound);
}

double volume_ratio_bound(const BoxDomain& domain, double epsilon, double lipschitz_constant) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  if (!(lipschitz_constant > 0.0))
    throw Error(ErrorCode::NonPositiveLipschitz, "Lipschitz constant must be positive");
  const int n = domain.dim();
  const double r = epsilon / (2.0 * lipschitz_constant);
  // elementary[k] = sum over k-subsets of side products.
  std::vector<double> elementary(n + 1, 0.0);
  elementary[0] = 1.0;
  const Eigen::VectorXd sides = domain.sides();
  for (int i = 0; i < n; ++i) {
    for (int k = i + 1; k >= 1; --k) elementary[k] += elementary[k - 1] * sides[i];
  }
  double volume = 0.0;
  for (int k = 0; k <= n; ++k) volume += elementary[k] * unit_ball_volume(n - k) * std::pow(r, n - k);
  return volume / (unit_ball_volume(n) * std::pow(r, n));
}

double certified_fraction(const CertificationState& state, const BoxDomain& domain,
                          std::size_t n_samples, std::uint64_t seed, Execution exec) {
  if (n_samples < 1) throw Error(ErrorCode::InvalidArgument, "need at least one sample");
  std::vector<Point> centers;
  std::vector<double> radii;
  for (std::size_t j = 0; j < state.size(); ++j) {
    if (state.violation_flags[j]) continue;
    centers.push_back(state.points[j]);
    radii.push_back(state.radii[j]);
  }
  if (centers.empty()) return 0.0;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int n = domain.dim();
  std::vector<Point> samples(n_samples, Point(n));
  for (auto& s : samples) {
    for (int i = 0; i < n; ++i) s[i] = domain.lower()[i] + unit(rng) * (domain.upper()[i] - domain.lower()[i]);
  }
  const std::size_t hits = count_covered_samples(samples, centers, radii, exec);
  return static_cast<double>(hits) / static_cast<double>(n_samples);
}

}  // namespace lipvor
