#include "lipvor/heat.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "lipvor/error.hpp"

namespace lipvor {

void validate_scenario(const HeatScenario& s) {
  if (!(s.rod_length > 0) || !(s.diffusivity > 0) || !(s.time_horizon > 0))
    throw Error(ErrorCode::InvalidArgument, "rod length, diffusivity and time horizon must be positive");
  if (s.n_samples < 1) throw Error(ErrorCode::InvalidArgument, "n_samples must be at least 1");
  if (!(s.noise_sigma >= 0)) throw Error(ErrorCode::InvalidArgument, "noise_sigma must be non-negative");
  if (s.series_terms < 1) throw Error(ErrorCode::InvalidArgument, "series_terms must be at least 1");
}

namespace {

void check_point(double x, double t, const HeatScenario& s) {
  validate_scenario(s);
  if (!(x >= 0 && x <= s.rod_length) || !(t >= 0) || !std::isfinite(t))
    throw Error(ErrorCode::OutOfDomain, "heat solution queried outside 0 <= x <= L, t >= 0");
}

// Sum over odd n of coef(n) * sin(n pi x / L) * exp(-k (n pi / L)^2 t).
template <class Coef>
double series(double x, double t, const HeatScenario& s, Coef coef) {
  const double L = s.rod_length, k = s.diffusivity;
  double sum = 0.0;
  for (std::size_t j = 0; j < s.series_terms; ++j) {
    const double n = static_cast<double>(2 * j + 1);
    const double w = n * std::numbers::pi / L;
    const double decay = std::exp(-k * w * w * t);
    if (decay == 0.0) break;
    sum += coef(n, w) * std::sin(w * x) * decay;
  }
  return sum;
}

}  // namespace

double heat_solution(double x, double t, const HeatScenario& s) {
  check_point(x, t, s);
  const double L = s.rod_length, k = s.diffusivity;
  const double c0 = 4 * L * L / (k * std::pow(std::numbers::pi, 3));
  return t + x * (x - L) / (2 * k) + series(x, t, s, [&](double n, double) { return c0 / (n * n * n); });
}

double heat_solution_dt(double x, double t, const HeatScenario& s) {
  check_point(x, t, s);
  const double L = s.rod_length, k = s.diffusivity;
  const double c0 = 4 * L * L / (k * std::pow(std::numbers::pi, 3));
  return 1.0 + series(x, t, s, [&](double n, double w) { return -k * w * w * c0 / (n * n * n); });
}

BoxDomain heat_domain(const HeatScenario& s) {
  validate_scenario(s);
  Point lo(2), hi(2);
  lo << 0.0, 0.0;
  hi << s.rod_length, s.time_horizon;
  return BoxDomain(lo, hi);
}

Dataset generate_heat_dataset(const HeatScenario& s) {
  validate_scenario(s);
  std::mt19937_64 rng(s.seed);
  std::uniform_real_distribution<double> ux(0.0, s.rod_length), ut(0.0, s.time_horizon);
  std::normal_distribution<double> noise(0.0, 1.0);
  Dataset d;
  d.inputs.resize(static_cast<Eigen::Index>(s.n_samples), 2);
  d.targets.resize(static_cast<Eigen::Index>(s.n_samples));
  for (std::size_t i = 0; i < s.n_samples; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    const double x = ux(rng), t = ut(rng);
    d.inputs(r, 0) = x;
    d.inputs(r, 1) = t;
    d.targets[r] = heat_solution(x, t, s);
    if (s.noise_sigma > 0) d.targets[r] += s.noise_sigma * noise(rng);
  }
  assign_splits(d, 0.2, 0.2, rng);
  return d;
}

}  // namespace lipvor
