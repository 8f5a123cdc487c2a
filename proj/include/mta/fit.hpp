#pragma once

#include <span>
#include <vector>

#include "mta/likelihood.hpp"
#include "mta/model.hpp"
#include "mta/sampler.hpp"

namespace mta {

/// Samples the posterior of `spec` on `dataset` and returns constrained draws
/// named mu, gamma, beta[c], lambda[c], sigma_b, b[i], sigma_y.
PosteriorDraws fit_model(std::span<const Journey> dataset, const PriorConfig& priors,
                         const ModelSpec& spec, const SamplerConfig& config);

/// Decodes one constrained draw laid out as ParameterLayout::names().
ModelParams params_from_draw(std::span<const double> draw, const ParameterLayout& layout);

/// Checks that `draws` carries exactly the constrained columns of `spec` for
/// `n_customers` journeys and returns the matching layout.
ParameterLayout check_draws_layout(const PosteriorDraws& draws, const ModelSpec& spec,
                                   std::size_t n_customers);

/// Reads link, channel count and random-effect presence off the column names.
/// The interaction flag cannot be recovered and is taken from the argument.
ModelSpec spec_from_names(const std::vector<std::string>& names, bool include_interaction);

}  // namespace mta
