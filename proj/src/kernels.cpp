#include "lipvor/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "lipvor/error.hpp"

namespace lipvor {

namespace detail {

void run_indexed(std::size_t n, Execution exec, const std::function<void(std::size_t)>& body) {
  if (exec == Execution::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr error;
  std::size_t error_index = n;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      // Keep the lowest failing index so the reported error is deterministic.
      if (static_cast<std::size_t>(i) < error_index) {
        error_index = static_cast<std::size_t>(i);
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

std::vector<VoronoiCell> compute_cells(std::span<const Point> points, const BoxDomain& domain,
                                       Execution exec) {
  std::vector<VoronoiCell> cells(points.size());
  parallel_for(points.size(), exec, [&](std::size_t j) { cells[j] = compute_cell(j, points, domain); });
  return cells;
}

std::size_t count_covered_samples(std::span<const Point> samples, std::span<const Point> centers,
                                  std::span<const double> radii, Execution exec) {
  if (centers.size() != radii.size())
    throw Error(ErrorCode::DimensionMismatch, "centers and radii differ in length");
  std::vector<unsigned char> hit(samples.size(), 0);
  parallel_for(samples.size(), exec, [&](std::size_t s) {
    for (std::size_t c = 0; c < centers.size(); ++c) {
      if ((samples[s] - centers[c]).squaredNorm() < radii[c] * radii[c]) {
        hit[s] = 1;
        return;
      }
    }
  });
  std::size_t total = 0;
  for (unsigned char h : hit) total += h;
  return total;
}

std::size_t grid_size(int dim, int per_dim) {
  if (per_dim < 2) throw Error(ErrorCode::InvalidArgument, "grid needs at least 2 nodes per axis");
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(per_dim);
  return total;
}

Point grid_node(const BoxDomain& domain, int per_dim, std::size_t flat_index) {
  const int n = domain.dim();
  Point x(n);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<double>(flat_index % static_cast<std::size_t>(per_dim));
    flat_index /= static_cast<std::size_t>(per_dim);
    const double t = k / static_cast<double>(per_dim - 1);
    x[i] = domain.lower()[i] + t * (domain.upper()[i] - domain.lower()[i]);
  }
  return x;
}

namespace {

std::pair<double, Point> grid_extreme(const std::function<double(const Point&)>& fn,
                                      const BoxDomain& domain, int per_dim, Execution exec,
                                      bool maximize) {
  const std::size_t total = grid_size(domain.dim(), per_dim);
  constexpr std::size_t kBlock = 4096;
  const std::size_t blocks = (total + kBlock - 1) / kBlock;
  std::vector<std::pair<double, std::size_t>> block_best(blocks);
  auto better = [maximize](double a, double b) { return maximize ? a > b : a < b; };
  parallel_for(blocks, exec, [&](std::size_t blk) {
    const std::size_t begin = blk * kBlock;
    const std::size_t end = std::min(total, begin + kBlock);
    std::pair<double, std::size_t> best{fn(grid_node(domain, per_dim, begin)), begin};
    for (std::size_t k = begin + 1; k < end; ++k) {
      const double v = fn(grid_node(domain, per_dim, k));
      if (better(v, best.first) || std::isnan(v)) best = {v, k};
      if (std::isnan(v)) break;
    }
    block_best[blk] = best;
  });
  auto best = block_best.front();
  for (const auto& b : block_best) {
    if (std::isnan(best.first)) break;
    if (better(b.first, best.first) || std::isnan(b.first)) best = b;
  }
  return {best.first, grid_node(domain, per_dim, best.second)};
}

}  // namespace

std::pair<double, Point> grid_minimum(const std::function<double(const Point&)>& fn,
                                      const BoxDomain& domain, int per_dim, Execution exec) {
  return grid_extreme(fn, domain, per_dim, exec, false);
}

std::pair<double, Point> grid_maximum(const std::function<double(const Point&)>& fn,
                                      const BoxDomain& domain, int per_dim, Execution exec) {
  return grid_extreme(fn, domain, per_dim, exec, true);
}

}  // namespace lipvor
