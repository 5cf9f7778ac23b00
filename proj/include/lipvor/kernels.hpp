#pragma once

// Data-parallel kernels. Each has an OpenMP path and a serial path; both
// produce bitwise-identical results (per-index writes, serial reductions).

#include <cstddef>
#include <exception>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "lipvor/geometry.hpp"

namespace lipvor {

enum class Execution { Serial, Parallel };

namespace detail {
void run_indexed(std::size_t n, Execution exec, const std::function<void(std::size_t)>& body);
}

/// Calls fn(i) for i in [0, n). The first exception thrown by any iteration
/// is rethrown on the calling thread after the loop completes.
template <class Fn>
void parallel_for(std::size_t n, Execution exec, Fn&& fn) {
  detail::run_indexed(n, exec, std::function<void(std::size_t)>(std::forward<Fn>(fn)));
}

/// Every cell of the diagram of `points` clipped to `domain`.
std::vector<VoronoiCell> compute_cells(std::span<const Point> points, const BoxDomain& domain,
                                       Execution exec = Execution::Parallel);

/// Number of samples lying in at least one open ball B(centers[i], radii[i]).
std::size_t count_covered_samples(std::span<const Point> samples, std::span<const Point> centers,
                                  std::span<const double> radii,
                                  Execution exec = Execution::Parallel);

/// Regular grid with `per_dim` nodes per axis (endpoints included).
Point grid_node(const BoxDomain& domain, int per_dim, std::size_t flat_index);
std::size_t grid_size(int dim, int per_dim);

/// min / max of fn over the regular grid, with the node attaining it.
/// fn must be safe to call concurrently when exec is Parallel.
std::pair<double, Point> grid_minimum(const std::function<double(const Point&)>& fn,
                                      const BoxDomain& domain, int per_dim,
                                      Execution exec = Execution::Parallel);
std::pair<double, Point> grid_maximum(const std::function<double(const Point&)>& fn,
                                      const BoxDomain& domain, int per_dim,
                                      Execution exec = Execution::Parallel);

}  // namespace lipvor
