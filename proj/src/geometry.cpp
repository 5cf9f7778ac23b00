#include "lipvor/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lipvor/error.hpp"

namespace lipvor {

namespace {

void check_dimension(int n) {
  if (n > kMaxDimension) {
    throw Error(ErrorCode::DimensionTooHigh,
                "vertex enumeration supports at most " + std::to_string(kMaxDimension) +
                    " dimensions, got " + std::to_string(n));
  }
}

VoronoiCell box_cell(std::size_t j, const BoxDomain& domain) {
  const int n = domain.dim();
  VoronoiCell cell;
  cell.generator_index = j;
  cell.halfspaces = box_halfspaces(domain);
  const std::size_t corners = std::size_t{1} << n;
  cell.vertices.reserve(corners);
  cell.vertex_facets.reserve(corners);
  for (std::size_t mask = 0; mask < corners; ++mask) {
    Point v(n);
    std::vector<int> facets(n);
    for (int i = 0; i < n; ++i) {
      const bool up = (mask >> i) & 1U;
      v[i] = up ? domain.upper()[i] : domain.lower()[i];
      facets[i] = 2 * i + (up ? 1 : 0);
    }
    cell.vertices.push_back(std::move(v));
    cell.vertex_facets.push_back(std::move(facets));
  }
  return cell;
}

std::vector<int> sorted_intersection(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Two vertices span an edge iff the normals tight at both have rank n-1.
bool adjacent(const std::vector<HalfSpace>& hs, const std::vector<int>& common, int n) {
  if (static_cast<int>(common.size()) < n - 1) return false;
  if (n == 1) return true;
  Eigen::MatrixXd m(common.size(), n);
  for (std::size_t r = 0; r < common.size(); ++r) m.row(r) = hs[common[r]].normal.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  lu.setThreshold(1e-9);
  return lu.rank() == n - 1;
}

void refresh_furthest(VoronoiCell& cell, const Point& generator) {
  auto [v, d] = furthest_vertex(cell.vertices, generator);
  cell.furthest_vertex = std::move(v);
  cell.furthest_distance = d;
}

}  // namespace

BoxDomain::BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() < 1) throw Error(ErrorCode::InvalidArgument, "box needs at least one dimension");
  if (lower_.size() != upper_.size())
    throw Error(ErrorCode::DimensionMismatch, "box bounds have different lengths");
  for (Eigen::Index i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i]))
      throw Error(ErrorCode::InvalidArgument, "box requires finite lower < upper on every axis");
  }
}

BoxDomain BoxDomain::unit(int dim) {
  return BoxDomain(Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim));
}

bool BoxDomain::contains(const Point& x, double tol) const {
  if (x.size() != lower_.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] >= lower_[i] - tol && x[i] <= upper_[i] + tol)) return false;
  }
  return true;
}

bool lexicographic_less(const Point& a, const Point& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

HalfSpace bisector(const Point& p_i, const Point& p_j) {
  if (p_i.size() != p_j.size()) throw Error(ErrorCode::DimensionMismatch, "bisector of points of different dimension");
  const Eigen::VectorXd diff = p_i - p_j;
  const double dist = diff.norm();
  if (!(dist > kDuplicateTolerance)) throw Error(ErrorCode::DuplicatePoint, "bisector of coincident points");
  // 2(p_i - p_j).x <= |p_i|^2 - |p_j|^2, scaled to a unit normal.
  const double scale = 2.0 * dist;
  HalfSpace h;
  h.normal = (2.0 / scale) * diff;
  h.offset = (p_i.squaredNorm() - p_j.squaredNorm()) / scale;
  return h;
}

std::vector<HalfSpace> box_halfspaces(const BoxDomain& domain) {
  const int n = domain.dim();
  std::vector<HalfSpace> out;
  out.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    HalfSpace lo{Eigen::VectorXd::Zero(n), -domain.lower()[i]};
    lo.normal[i] = -1.0;
    HalfSpace hi{Eigen::VectorXd::Zero(n), domain.upper()[i]};
    hi.normal[i] = 1.0;
    out.push_back(std::move(lo));
    out.push_back(std::move(hi));
  }
  return out;
}

bool clip_cell(VoronoiCell& cell, const HalfSpace& h) {
  const std::size_t nv = cell.vertices.size();
  if (nv == 0) throw Error(ErrorCode::NoVertices, "clipping an empty cell");
  const int n = static_cast<int>(cell.vertices.front().size());

  std::vector<double> s(nv);
  bool any_out = false;
  for (std::size_t v = 0; v < nv; ++v) {
    s[v] = h.slack(cell.vertices[v]);
    any_out = any_out || s[v] > kFeasibilityTolerance;
  }
  if (!any_out) return false;

  const int index = static_cast<int>(cell.halfspaces.size());
  cell.halfspaces.push_back(h);

  std::vector<Point> vertices;
  std::vector<std::vector<int>> facets;
  for (std::size_t v = 0; v < nv; ++v) {
    if (s[v] > kFeasibilityTolerance) continue;
    vertices.push_back(cell.vertices[v]);
    facets.push_back(cell.vertex_facets[v]);
    if (s[v] >= -kFeasibilityTolerance) facets.back().push_back(index);
  }
  const std::size_t kept = vertices.size();

  for (std::size_t u = 0; u < nv; ++u) {
    if (s[u] >= -kFeasibilityTolerance) continue;
    for (std::size_t v = 0; v < nv; ++v) {
      if (s[v] <= kFeasibilityTolerance) continue;
      std::vector<int> common = sorted_intersection(cell.vertex_facets[u], cell.vertex_facets[v]);
      if (!adjacent(cell.halfspaces, common, n)) continue;
      const double t = s[u] / (s[u] - s[v]);
      Point w = cell.vertices[u] + t * (cell.vertices[v] - cell.vertices[u]);
      common.push_back(index);
      bool merged = false;
      for (std::size_t k = kept; k < vertices.size(); ++k) {
        if ((vertices[k] - w).norm() <= kDuplicateTolerance) {
          facets[k] = sorted_union(facets[k], common);
          merged = true;
          break;
        }
      }
      if (!merged) {
        vertices.push_back(std::move(w));
        facets.push_back(std::move(common));
      }
    }
  }

  // A cell thinner than the feasibility tolerance keeps its collapsed vertex
  // set; its distances stay accurate to that tolerance.
  if (vertices.empty()) throw Error(ErrorCode::InternalGeometry, "clipping left an empty cell");
  cell.vertices = std::move(vertices);
  cell.vertex_facets = std::move(facets);
  return true;
}

VoronoiCell compute_cell(std::size_t j, std::span<const Point> points, const BoxDomain& domain) {
  if (j >= points.size()) throw Error(ErrorCode::IndexOutOfRange, "generator index out of range");
  const int n = domain.dim();
  check_dimension(n);
  const Point& gen = points[j];
  if (gen.size() != n) throw Error(ErrorCode::DimensionMismatch, "generator dimension differs from domain");
  if (!domain.contains(gen, kFeasibilityTolerance))
    throw Error(ErrorCode::PointOutsideDomain, "generator lies outside the box");

  std::vector<std::pair<double, std::size_t>> order;
  order.reserve(points.size());
  for (std::size_t l = 0; l < points.size(); ++l) {
    if (l == j) continue;
    const double d = (points[l] - gen).norm();
    if (d <= kDuplicateTolerance) throw Error(ErrorCode::DuplicatePoint, "duplicate generators");
    order.emplace_back(d, l);
  }
  std::sort(order.begin(), order.end());

  VoronoiCell cell = box_cell(j, domain);
  refresh_furthest(cell, gen);
  for (const auto& [d, l] : order) {
    // The bisector sits at d/2 from the generator; the cell lies within the
    // furthest-vertex ball, so nothing farther can cut it.
    if (0.5 * d >= cell.furthest_distance) break;
    if (clip_cell(cell, bisector(points[l], gen))) refresh_furthest(cell, gen);
  }
  return cell;
}

VoronoiCell compute_cell_bruteforce(std::size_t j, std::span<const Point> points,
                                    const BoxDomain& domain) {
  if (j >= points.size()) throw Error(ErrorCode::IndexOutOfRange, "generator index out of range");
  const int n = domain.dim();
  check_dimension(n);
  const Point& gen = points[j];
  if (!domain.contains(gen, kFeasibilityTolerance))
    throw Error(ErrorCode::PointOutsideDomain, "generator lies outside the box");

  VoronoiCell cell;
  cell.generator_index = j;
  cell.halfspaces = box_halfspaces(domain);
  for (std::size_t l = 0; l < points.size(); ++l) {
    if (l != j) cell.halfspaces.push_back(bisector(points[l], gen));
  }
  const int m = static_cast<int>(cell.halfspaces.size());

  std::vector<int> subset(n);
  std::iota(subset.begin(), subset.end(), 0);
  Eigen::MatrixXd a(n, n);
  Eigen::VectorXd b(n);
  while (true) {
    for (int r = 0; r < n; ++r) {
      a.row(r) = cell.halfspaces[subset[r]].normal.transpose();
      b[r] = cell.halfspaces[subset[r]].offset;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    lu.setThreshold(1e-10);
    if (lu.isInvertible()) {
      Point x = lu.solve(b);
      bool feasible = true;
      for (const auto& h : cell.halfspaces) {
        if (!h.contains(x)) {
          feasible = false;
          break;
        }
      }
      bool duplicate = false;
      if (feasible) {
        for (const auto& v : cell.vertices) {
          if ((v - x).norm() <= kDuplicateTolerance) {
            duplicate = true;
            break;
          }
        }
      }
      if (feasible && !duplicate) {
        std::vector<int> tight;
        for (int k = 0; k < m; ++k) {
          if (std::abs(cell.halfspaces[k].slack(x)) <= kFeasibilityTolerance) tight.push_back(k);
        }
        cell.vertices.push_back(std::move(x));
        cell.vertex_facets.push_back(std::move(tight));
      }
    }
    // Next n-subset in lexicographic order.
    int i = n - 1;
    while (i >= 0 && subset[i] == m - n + i) --i;
    if (i < 0) break;
    ++subset[i];
    for (int k = i + 1; k < n; ++k) subset[k] = subset[k - 1] + 1;
  }
  if (cell.vertices.empty()) throw Error(ErrorCode::InternalGeometry, "empty cell");
  refresh_furthest(cell, gen);
  return cell;
}

std::pair<Point, double> furthest_vertex(std::span<const Point> vertices, const Point& generator) {
  if (vertices.empty()) throw Error(ErrorCode::NoVertices, "cell has no vertices");
  std::size_t best = 0;
  double best_d = (vertices[0] - generator).norm();
  for (std::size_t v = 1; v < vertices.size(); ++v) {
    const double d = (vertices[v] - generator).norm();
    if (d > best_d || (d == best_d && lexicographic_less(vertices[v], vertices[best]))) {
      best = v;
      best_d = d;
    }
  }
  return {vertices[best], best_d};
}

std::pair<Point, double> furthest_vertex(const VoronoiCell& cell, const Point& generator) {
  return furthest_vertex(cell.vertices, generator);
}

std::size_t covered_count(const Point& vertex, std::span<const Point> points,
                          std::span<const double> radii, std::size_t exclude) {
  if (points.size() != radii.size())
    throw Error(ErrorCode::DimensionMismatch, "points and radii differ in length");
  std::size_t count = 0;
  for (std::size_t l = 0; l < points.size(); ++l) {
    if (l == exclude) continue;
    if ((points[l] - vertex).norm() <= radii[l]) ++count;
  }
  return count;
}

}  // namespace lipvor
