#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mta/likelihood.hpp"

namespace mta {

/// Tolerances for comparing an analytic gradient coordinate against central
/// differences: relative error where |analytic| > `small`, absolute otherwise.
struct GradientTolerance {
  double step = 1e-5;
  double relative = 1e-6;
  double absolute = 1e-8;
  double small = 1e-8;
};

/// Central-difference gradient of the posterior at `theta`, evaluated in
/// extended precision with step h and refined by one Richardson step (h/2).
std::vector<double> finite_difference_gradient(const Posterior& posterior,
                                               std::span<const double> theta,
                                               double step = 1e-5);

/// True when `analytic` agrees with `numeric` under `tol`.
bool gradient_coordinate_ok(double analytic, double numeric, const GradientTolerance& tol);

struct GradientCheckConfig {
  std::size_t points = 100;  ///< random points per link
  std::size_t n_channels = 3;
  std::size_t n_journeys = 50;
  std::uint64_t seed = 1;
  bool random_effects = true;
  GradientTolerance tolerance;
};

struct GradientCheckFailure {
  std::string link;
  std::size_t point = 0;
  std::string parameter;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradientCheckResult {
  std::size_t points_checked = 0;
  std::size_t coordinates_checked = 0;
  double max_relative_error = 0.0;
  double max_absolute_error_small = 0.0;
  std::vector<GradientCheckFailure> failures;

  bool passed() const { return failures.empty(); }
};

/// Random (theta, dataset) pairs under both links; each analytic gradient
/// coordinate is compared to finite differences.
GradientCheckResult check_gradients(const GradientCheckConfig& config);

}  // namespace mta
