#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace lipvor {

using Point = Eigen::VectorXd;

/// Half-space feasibility slack.
inline constexpr double kFeasibilityTolerance = 1e-9;
/// Point / vertex deduplication distance.
inline constexpr double kDuplicateTolerance = 1e-10;
/// Vertex enumeration is combinatorial in the dimension; larger boxes are rejected.
inline constexpr int kMaxDimension = 6;

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

/// Axis-aligned compact domain [lower, upper].
class BoxDomain {
 public:
  BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper);

  static BoxDomain unit(int dim);

  int dim() const { return static_cast<int>(lower_.size()); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }
  Eigen::VectorXd sides() const { return upper_ - lower_; }
  double max_side() const { return sides().maxCoeff(); }
  double volume() const { return sides().prod(); }
  Point center() const { return 0.5 * (lower_ + upper_); }

  bool contains(const Point& x, double tol = 0.0) const;

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

/// {x : normal . x <= offset}, with a unit normal.
struct HalfSpace {
  Eigen::VectorXd normal;
  double offset = 0.0;

  double slack(const Point& x) const { return normal.dot(x) - offset; }
  bool contains(const Point& x, double tol = kFeasibilityTolerance) const {
    return slack(x) <= tol;
  }
};

/// A Voronoi cell clipped to the box.
///
/// `halfspaces` holds the box faces followed by the bisectors that were
/// needed to carve the cell; `vertex_facets[v]` lists the indices of the
/// half-spaces tight at `vertices[v]` (sorted), which the incremental
/// clipper uses to decide edge adjacency.
struct VoronoiCell {
  std::size_t generator_index = 0;
  std::vector<HalfSpace> halfspaces;
  std::vector<Point> vertices;
  std::vector<std::vector<int>> vertex_facets;
  Point furthest_vertex;
  double furthest_distance = 0.0;
};

/// Half-space of points at least as close to `p_j` as to `p_i`.
HalfSpace bisector(const Point& p_i, const Point& p_j);

/// The 2n faces of the box; face 2i is the lower bound of axis i, 2i+1 the upper.
std::vector<HalfSpace> box_halfspaces(const BoxDomain& domain);

/// Cell of `points[j]` by incremental half-space clipping of the box, taking
/// bisectors in order of distance and stopping once no farther generator can
/// reach the cell.
VoronoiCell compute_cell(std::size_t j, std::span<const Point> points, const BoxDomain& domain);

/// Reference construction: every bisector plus the box faces, vertices found
/// by solving every n-subset of boundaries and keeping feasible solutions.
/// O(C(m, n)) so only suitable for small inputs and tests.
VoronoiCell compute_cell_bruteforce(std::size_t j, std::span<const Point> points,
                                    const BoxDomain& domain);

/// Clips `cell` by `h`. Returns false when `h` does not cut the cell.
bool clip_cell(VoronoiCell& cell, const HalfSpace& h);

/// Argmax of the distance to `generator`; exact ties go to the
/// lexicographically smallest vertex.
std::pair<Point, double> furthest_vertex(std::span<const Point> vertices, const Point& generator);
std::pair<Point, double> furthest_vertex(const VoronoiCell& cell, const Point& generator);

/// Number of balls B(points[l], radii[l]) (closed) containing `vertex`, l != exclude.
std::size_t covered_count(const Point& vertex, std::span<const Point> points,
                          std::span<const double> radii, std::size_t exclude = kNoIndex);

/// Strict lexicographic order on coordinates.
bool lexicographic_less(const Point& a, const Point& b);

}  // namespace lipvor
