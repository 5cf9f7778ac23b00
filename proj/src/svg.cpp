#include "lipvor/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "lipvor/config.hpp"
#include "lipvor/error.hpp"
#include "lipvor/tabular.hpp"

namespace lipvor {

namespace {

std::size_t column(const CsvTable& t, const std::string& name) {
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw Error(ErrorCode::MalformedCSV, "missing column '" + name + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

double number(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::NonNumeric, "non-numeric field '" + s + "'");
  }
}

}  // namespace

PlotState read_plot_state(std::istream& points_csv, std::istream& cells_csv) {
  const CsvTable pts = read_csv(points_csv);
  const CsvTable cells = read_csv(cells_csv);
  const std::size_t cx = column(pts, "x0"), cy = column(pts, "x1");
  if (column(pts, "index") != 0 || pts.header.size() != 7)
    throw Error(ErrorCode::DimensionMismatch, "plotting needs a 2-D points file");
  const std::size_t cr = column(pts, "radius"), cv = column(pts, "violating");

  PlotState s;
  for (const auto& row : pts.rows) {
    Point p(2);
    p << number(row[cx]), number(row[cy]);
    s.points.push_back(p);
    s.radii.push_back(number(row[cr]));
    s.violating.push_back(number(row[cv]) != 0.0);
  }
  s.cell_vertices.resize(s.points.size());
  const std::size_t cg = column(cells, "generator_index"), vx = column(cells, "x0"), vy = column(cells, "x1");
  for (const auto& row : cells.rows) {
    const auto g = static_cast<std::size_t>(number(row[cg]));
    if (g >= s.points.size()) throw Error(ErrorCode::IndexOutOfRange, "cell generator out of range");
    Point v(2);
    v << number(row[vx]), number(row[vy]);
    s.cell_vertices[g].push_back(v);
  }
  return s;
}

void write_svg(std::ostream& out, const PlotState& st, const BoxDomain& domain, int pixels) {
  if (domain.dim() != 2) throw Error(ErrorCode::DimensionMismatch, "plotting is 2-D only");
  const double margin = 20.0, size = pixels;
  const Point lo = domain.lower(), span = domain.sides();
  const double scale = (size - 2 * margin) / std::max(span[0], span[1]);
  auto sx = [&](double x) { return format_double(margin + (x - lo[0]) * scale); };
  auto sy = [&](double y) { return format_double(size - margin - (y - lo[1]) * scale); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << pixels << "\" height=\"" << pixels
      << "\" viewBox=\"0 0 " << pixels << ' ' << pixels << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << pixels << "\" height=\"" << pixels << "\" fill=\"white\"/>\n";
  out << "<defs><clipPath id=\"box\"><rect x=\"" << sx(lo[0]) << "\" y=\"" << sy(lo[1] + span[1]) << "\" width=\""
      << format_double(span[0] * scale) << "\" height=\"" << format_double(span[1] * scale)
      << "\"/></clipPath></defs>\n";

  out << "<g clip-path=\"url(#box)\">\n";
  for (std::size_t j = 0; j < st.points.size(); ++j) {
    if (st.radii[j] <= 0) continue;
    const char* fill = st.violating[j] ? "#f4a6a6" : "#a6d3f4";
    out << "<circle cx=\"" << sx(st.points[j][0]) << "\" cy=\"" << sy(st.points[j][1]) << "\" r=\""
        << format_double(st.radii[j] * scale) << "\" fill=\"" << fill << "\" fill-opacity=\"0.5\"/>\n";
  }
  out << "</g>\n";

  for (const auto& verts : st.cell_vertices) {
    if (verts.size() < 3) continue;
    Point c = Point::Zero(2);
    for (const auto& v : verts) c += v;
    c /= static_cast<double>(verts.size());
    std::vector<Point> ring = verts;
    std::sort(ring.begin(), ring.end(), [&](const Point& a, const Point& b) {
      return std::atan2(a[1] - c[1], a[0] - c[0]) < std::atan2(b[1] - c[1], b[0] - c[0]);
    });
    out << "<polygon points=\"";
    for (std::size_t i = 0; i < ring.size(); ++i) out << (i ? " " : "") << sx(ring[i][0]) << ',' << sy(ring[i][1]);
    out << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  }

  for (std::size_t j = 0; j < st.points.size(); ++j) {
    const std::string x = sx(st.points[j][0]), y = sy(st.points[j][1]);
    if (st.violating[j]) {
      const double px = margin + (st.points[j][0] - lo[0]) * scale;
      const double py = size - margin - (st.points[j][1] - lo[1]) * scale;
      out << "<path d=\"M" << format_double(px - 5) << ' ' << format_double(py - 5) << " L" << format_double(px + 5)
          << ' ' << format_double(py + 5) << " M" << format_double(px - 5) << ' ' << format_double(py + 5) << " L"
          << format_double(px + 5) << ' ' << format_double(py - 5) << "\" stroke=\"#c00\" stroke-width=\"2\"/>\n";
    } else {
      out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"2\" fill=\"#000\"/>\n";
    }
  }
  out << "<rect x=\"" << sx(lo[0]) << "\" y=\"" << sy(lo[1] + span[1]) << "\" width=\"" << format_double(span[0] * scale)
      << "\" height=\"" << format_double(span[1] * scale) << "\" fill=\"none\" stroke=\"#000\"/>\n";
  out << "</svg>\n";
}

}  // namespace lipvor
