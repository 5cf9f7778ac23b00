// Serial vs OpenMP paths of the data-parallel kernels.

#include <random>

#include <benchmark/benchmark.h>

#include "lipvor/kernels.hpp"
#include "lipvor/lipschitz.hpp"
#include "lipvor/network.hpp"

namespace {

using namespace lipvor;

std::vector<Point> random_points(std::size_t n, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> pts(n, Point(dim));
  for (auto& p : pts)
    for (int i = 0; i < dim; ++i) p[i] = u(rng);
  return pts;
}

Execution mode(const benchmark::State& s) { return s.range(0) ? Execution::Parallel : Execution::Serial; }

void BM_ComputeCells(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(1)), 2, 1);
  const BoxDomain box = BoxDomain::unit(2);
  for (auto _ : state) benchmark::DoNotOptimize(compute_cells(pts, box, mode(state)));
}
BENCHMARK(BM_ComputeCells)->ArgsProduct({{0, 1}, {200, 1000}})->Unit(benchmark::kMillisecond);

void BM_ComputeCells3D(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(1)), 3, 2);
  const BoxDomain box = BoxDomain::unit(3);
  for (auto _ : state) benchmark::DoNotOptimize(compute_cells(pts, box, mode(state)));
}
BENCHMARK(BM_ComputeCells3D)->ArgsProduct({{0, 1}, {200}})->Unit(benchmark::kMillisecond);

void BM_CountCovered(benchmark::State& state) {
  const auto samples = random_points(100000, 2, 3);
  const auto centers = random_points(500, 2, 4);
  const std::vector<double> radii(centers.size(), 0.03);
  for (auto _ : state) benchmark::DoNotOptimize(count_covered_samples(samples, centers, radii, mode(state)));
}
BENCHMARK(BM_CountCovered)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GradientGridSup(benchmark::State& state) {
  std::mt19937_64 rng(5);
  const Network net = random_network({2, 16, 16, 1}, {Activation::Tanh, Activation::Tanh, Activation::Identity}, rng);
  const BoxDomain box = BoxDomain::unit(2);
  for (auto _ : state) benchmark::DoNotOptimize(empirical_gradient_sup(net, 0, box, 101, mode(state)));
}
BENCHMARK(BM_GradientGridSup)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
