#pragma once

// Rod with both ends driven at u = t and zero initial temperature:
//   u_t = k u_xx,  u(0,t) = u(L,t) = t,  u(x,0) = 0.
// With w(x) = x(x-L)/(2k) the solution is
//   u = t + w(x) + sum_{n odd} 4L^2/(k pi^3 n^3) sin(n pi x / L) exp(-k (n pi / L)^2 t).

#include <cstddef>
#include <cstdint>

#include "lipvor/geometry.hpp"
#include "lipvor/training.hpp"

namespace lipvor {

struct HeatScenario {
  double rod_length = 1.0;
  double diffusivity = 1.0;
  double time_horizon = 1.0;
  std::size_t n_samples = 30;
  double noise_sigma = 0.02;
  std::uint64_t seed = 0;
  /// Number of odd-index terms kept in the series.
  std::size_t series_terms = 2000;
};

void validate_scenario(const HeatScenario& s);

double heat_solution(double x, double t, const HeatScenario& s);
/// du/dt from the same truncated series.
double heat_solution_dt(double x, double t, const HeatScenario& s);

/// [0, L] x [0, time_horizon]; inputs are ordered (x, t).
BoxDomain heat_domain(const HeatScenario& s);

/// Uniform (x, t) samples, targets u + N(0, sigma^2); 20% test, then 20% of
/// the rest for validation.
Dataset generate_heat_dataset(const HeatScenario& s);

}  // namespace lipvor
