#pragma once

#include <iosfwd>
#include <vector>

#include "lipvor/geometry.hpp"

namespace lipvor {

/// What a 2-D snapshot needs: evaluated points with their balls and the
/// vertices of each cell.
struct PlotState {
  std::vector<Point> points;
  std::vector<double> radii;
  std::vector<bool> violating;
  std::vector<std::vector<Point>> cell_vertices;  // indexed by generator
};

/// Parses the points and cells CSV files written by the report module.
PlotState read_plot_state(std::istream& points_csv, std::istream& cells_csv);

/// Cells as polygons, balls as circles, violating points as crosses.
void write_svg(std::ostream& out, const PlotState& state, const BoxDomain& domain, int pixels = 600);

}  // namespace lipvor
