#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mta/model.hpp"

namespace mta {

/// Hyperparameters of the prior.
///
///   sigma_b  ~ Exponential(rate = sigma_b_rate)
///   beta_c   ~ Exponential(scale = beta_scale)
///   gamma    ~ Normal(0, gamma_sd)
///   mu       ~ Normal(0, mu_sd)
///   lambda_c ~ Uniform(0, 1)
///   b_i      ~ Normal(0, sigma_b)
///   sigma_y  ~ HalfNormal(sigma_y_scale)        (identity link only)
struct PriorConfig {
  double sigma_b_rate = 0.5;
  double beta_scale = 10.0;
  double gamma_sd = 10.0;
  double mu_sd = 10.0;
  double sigma_y_scale = 1.0;
};

void validate_priors(const PriorConfig& priors);

/// Offsets of each block inside the unconstrained vector:
/// [mu, gamma, log beta (C), logit lambda (C), log sigma_b, raw b (N), log sigma_y]
/// The sigma_b/raw-b block exists only with random effects, log sigma_y only
/// under the identity link. b_i = sigma_b * raw_i.
struct ParameterLayout {
  std::size_t n_channels = 0;
  std::size_t n_customers = 0;
  bool random_effects = false;
  bool observation_noise = false;

  static constexpr std::size_t mu = 0;
  static constexpr std::size_t gamma = 1;
  std::size_t beta(std::size_t c) const { return 2 + c; }
  std::size_t lambda(std::size_t c) const { return 2 + n_channels + c; }
  std::size_t sigma_b() const { return 2 + 2 * n_channels; }
  std::size_t b(std::size_t i) const { return 3 + 2 * n_channels + i; }
  std::size_t sigma_y() const { return dimension() - 1; }
  std::size_t dimension() const {
    return 2 + 2 * n_channels + (random_effects ? n_customers + 1 : 0) +
           (observation_noise ? 1 : 0);
  }

  /// Constrained-space names in layout order: mu, gamma, beta[c], lambda[c],
  /// sigma_b, b[i], sigma_y.
  std::vector<std::string> names() const;
};

ParameterLayout make_layout(const ModelSpec& spec, std::size_t n_customers);
/// Recovers the customer count from the vector length.
ParameterLayout layout_for_dimension(const ModelSpec& spec, std::size_t dimension);

struct UnconstrainedVector {
  std::vector<double> theta;
};

UnconstrainedVector to_unconstrained(const ModelParams& params, const ModelSpec& spec);
ModelParams to_constrained(const UnconstrainedVector& theta, const ModelSpec& spec);
ModelParams to_constrained(std::span<const double> theta, const ModelSpec& spec);

/// Checks outcomes are in {0, 1} under the logit link and every journey is
/// valid for the spec.
void validate_dataset(std::span<const Journey> dataset, const ModelSpec& spec);

double log_likelihood(std::span<const Journey> dataset, const ModelParams& params,
                      const ModelSpec& spec);

double log_prior(const ModelParams& params, const PriorConfig& priors,
                 const ModelSpec& spec);

/// log |d constrained / d unconstrained| at `theta`, including the b = sigma_b
/// * raw scaling.
double log_jacobian(std::span<const double> theta, const ModelSpec& spec);

double log_posterior_unconstrained(std::span<const double> theta,
                                   std::span<const Journey> dataset,
                                   const PriorConfig& priors, const ModelSpec& spec);

std::vector<double> grad_log_posterior(std::span<const double> theta,
                                       std::span<const Journey> dataset,
                                       const PriorConfig& priors,
                                       const ModelSpec& spec);

/// Unconstrained posterior with the dataset flattened for repeated evaluation.
/// Evaluation is const and thread-safe.
class Posterior {
 public:
  Posterior(std::span<const Journey> dataset, PriorConfig priors, ModelSpec spec);

  const ParameterLayout& layout() const { return layout_; }
  const ModelSpec& spec() const { return spec_; }
  std::size_t dimension() const { return layout_.dimension(); }

  double log_density(std::span<const double> theta) const;
  /// Same density in extended precision; used by finite-difference checks.
  long double log_density_extended(std::span<const double> theta) const;
  /// Returns the log density and writes the gradient into `gradient`.
  double log_density_gradient(std::span<const double> theta,
                              std::span<double> gradient) const;

 private:
  template <typename Real>
  Real evaluate(std::span<const double> theta) const;

  PriorConfig priors_;
  ModelSpec spec_;
  ParameterLayout layout_;
  // Flattened touches: journey j owns [offsets_[j], offsets_[j + 1]).
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> channels_;
  std::vector<double> elapsed_;
  std::vector<double> outcomes_;
};

}  // namespace mta
