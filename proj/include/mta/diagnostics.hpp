#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mta/sampler.hpp"

namespace mta {

/// Convergence diagnostics per parameter.
///
/// rhat is the rank-normalized split-R-hat (maximum of the bulk and folded
/// versions). A parameter whose draws are all identical has no defined R-hat
/// and is flagged `degenerate` with rhat = NaN; chains stuck at different
/// constants give rhat = +inf.
struct Diagnostics {
  std::vector<std::string> names;
  std::vector<double> rhat;
  std::vector<double> ess_bulk;
  std::vector<double> ess_tail;
  std::vector<bool> degenerate;

  /// Largest R-hat over non-degenerate parameters (1 if there are none).
  double max_rhat() const;
};

Diagnostics diagnostics(const PosteriorDraws& draws);

/// R-hat of already-split chains on raw (not rank-normalized) draws; `chains`
/// holds one vector per half-chain, all of equal length.
double split_rhat(const std::vector<std::vector<double>>& chains);
/// Multi-chain effective sample size (Geyer initial monotone sequence) of
/// already-split chains. Capped at the total number of draws.
double effective_sample_size(const std::vector<std::vector<double>>& chains);
/// Normal scores of pooled ranks with ties averaged: Phi^-1((r - 3/8)/(S + 1/4)).
std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains);

/// Type-7 (linear interpolation) sample quantile; `sorted` must be ascending.
double quantile_sorted(std::span<const double> sorted, double prob);

struct HalfLifeSummary {
  double mean = 0.0;
  double median = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q25 = 0.0;
  double q50 = 0.0;
  double q75 = 0.0;
  double q975 = 0.0;
  double width95 = 0.0;  ///< q975 - q025
  std::optional<HalfLifeSummary> half_life;  ///< lambda[...] parameters only
};

ParameterSummary summarize_values(const std::string& name, std::span<const double> values);
std::vector<ParameterSummary> summarize(const PosteriorDraws& draws);

}  // namespace mta
