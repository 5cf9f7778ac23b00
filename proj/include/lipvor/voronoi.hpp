#pragma once

#include <span>
#include <vector>

#include "lipvor/geometry.hpp"
#include "lipvor/kernels.hpp"

namespace lipvor {

/// Appends `p` to `points` and updates `cells` in place: cells cut by the new
/// bisector are clipped, the new cell is computed from scratch.
void insert_generator(std::vector<Point>& points, std::vector<VoronoiCell>& cells,
                      const BoxDomain& domain, Point p, Execution exec = Execution::Parallel);

/// Brings `cells` up to date after `points.back()` was appended: requires
/// cells.size() == points.size() - 1 and no validation is repeated.
void extend_diagram(std::span<const Point> points, std::vector<VoronoiCell>& cells,
                    const BoxDomain& domain, Execution exec = Execution::Parallel);

/// Box-clipped Voronoi diagram maintained under point insertion.
///
/// Inserting a generator clips only the cells its bisector actually cuts and
/// builds the new cell from scratch; the result matches a full recomputation
/// with compute_cells().
class VoronoiDiagram {
 public:
  explicit VoronoiDiagram(BoxDomain domain) : domain_(std::move(domain)) {}
  VoronoiDiagram(BoxDomain domain, std::vector<Point> points, Execution exec = Execution::Parallel);

  /// Adds a generator; throws DuplicatePoint / PointOutsideDomain.
  void insert(Point p, Execution exec = Execution::Parallel);

  const BoxDomain& domain() const { return domain_; }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<VoronoiCell>& cells() const { return cells_; }
  std::size_t size() const { return points_.size(); }

 private:
  BoxDomain domain_;
  std::vector<Point> points_;
  std::vector<VoronoiCell> cells_;
};

}  // namespace lipvor
