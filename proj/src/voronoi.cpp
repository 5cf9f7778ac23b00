#include "lipvor/voronoi.hpp"

#include "lipvor/error.hpp"

namespace lipvor {

void insert_generator(std::vector<Point>& points, std::vector<VoronoiCell>& cells,
                      const BoxDomain& domain, Point p, Execution exec) {
  if (p.size() != domain.dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from domain");
  if (!domain.contains(p, kFeasibilityTolerance))
    throw Error(ErrorCode::PointOutsideDomain, "inserted point lies outside the box");
  for (const auto& q : points) {
    if ((q - p).norm() <= kDuplicateTolerance) throw Error(ErrorCode::DuplicatePoint, "point already in diagram");
  }
  points.push_back(std::move(p));
  extend_diagram(points, cells, domain, exec);
}

void extend_diagram(std::span<const Point> points, std::vector<VoronoiCell>& cells,
                    const BoxDomain& domain, Execution exec) {
  if (points.empty() || cells.size() + 1 != points.size())
    throw Error(ErrorCode::InternalGeometry, "diagram and generator list out of step");
  const Point& p = points.back();
  parallel_for(cells.size(), exec, [&](std::size_t j) {
    VoronoiCell& cell = cells[j];
    const Point& gen = points[j];
    if (0.5 * (p - gen).norm() >= cell.furthest_distance) return;
    if (clip_cell(cell, bisector(p, gen))) {
      auto [v, d] = furthest_vertex(cell.vertices, gen);
      cell.furthest_vertex = std::move(v);
      cell.furthest_distance = d;
    }
  });
  cells.push_back(compute_cell(points.size() - 1, points, domain));
}

VoronoiDiagram::VoronoiDiagram(BoxDomain domain, std::vector<Point> points, Execution exec)
    : domain_(std::move(domain)), points_(std::move(points)) {
  cells_ = compute_cells(points_, domain_, exec);
}

void VoronoiDiagram::insert(Point p, Execution exec) {
  insert_generator(points_, cells_, domain_, std::move(p), exec);
}

}  // namespace lipvor
