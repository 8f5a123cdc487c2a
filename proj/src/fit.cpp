#include "mta/fit.hpp"

#include <algorithm>

#include "mta/errors.hpp"

namespace mta {

PosteriorDraws fit_model(std::span<const Journey> dataset, const PriorConfig& priors,
                         const ModelSpec& spec, const SamplerConfig& config) {
  const Posterior posterior(dataset, priors, spec);
  Target target;
  target.dimension = posterior.dimension();
  target.log_density = [&](std::span<const double> theta) {
    return posterior.log_density(theta);
  };
  target.log_density_gradient = [&](std::span<const double> theta, std::span<double> grad) {
    return posterior.log_density_gradient(theta, grad);
  };

  PosteriorDraws raw = run_sampler(target, config);
  PosteriorDraws out;
  out.names = posterior.layout().names();
  out.n_chains = raw.n_chains;
  out.n_samples = raw.n_samples;
  out.chains = std::move(raw.chains);
  out.values.resize(raw.values.size());

  const ParameterLayout& layout = posterior.layout();
  const std::size_t dim = layout.dimension();
  for (std::size_t k = 0; k < raw.total_draws(); ++k) {
    std::span<const double> theta(raw.values.data() + k * dim, dim);
    double* dst = out.values.data() + k * dim;
    const ModelParams p = to_constrained(theta, spec);
    dst[ParameterLayout::mu] = p.mu;
    dst[ParameterLayout::gamma] = p.gamma;
    for (std::size_t c = 0; c < spec.n_channels; ++c) {
      dst[layout.beta(c)] = p.beta[c];
      dst[layout.lambda(c)] = p.lambda[c];
    }
    if (layout.random_effects) {
      dst[layout.sigma_b()] = p.sigma_b;
      for (std::size_t i = 0; i < layout.n_customers; ++i) dst[layout.b(i)] = p.b[i];
    }
    if (layout.observation_noise) dst[layout.sigma_y()] = p.sigma_y;
  }
  return out;
}

ModelParams params_from_draw(std::span<const double> draw, const ParameterLayout& layout) {
  if (draw.size() != layout.dimension()) {
    throw InvalidInput("draw has " + std::to_string(draw.size()) + " values, layout expects " +
                       std::to_string(layout.dimension()));
  }
  ModelParams p;
  p.mu = draw[ParameterLayout::mu];
  p.gamma = draw[ParameterLayout::gamma];
  p.beta.resize(layout.n_channels);
  p.lambda.resize(layout.n_channels);
  for (std::size_t c = 0; c < layout.n_channels; ++c) {
    p.beta[c] = draw[layout.beta(c)];
    p.lambda[c] = draw[layout.lambda(c)];
  }
  if (layout.random_effects) {
    p.sigma_b = draw[layout.sigma_b()];
    p.b.assign(draw.begin() + static_cast<std::ptrdiff_t>(layout.b(0)),
               draw.begin() + static_cast<std::ptrdiff_t>(layout.b(0) + layout.n_customers));
  }
  if (layout.observation_noise) p.sigma_y = draw[layout.sigma_y()];
  return p;
}

ParameterLayout check_draws_layout(const PosteriorDraws& draws, const ModelSpec& spec,
                                   std::size_t n_customers) {
  const ParameterLayout layout = make_layout(spec, n_customers);
  if (draws.names != layout.names()) {
    throw InvalidInput("draw columns do not match the model (" +
                       std::to_string(draws.n_params()) + " columns, expected " +
                       std::to_string(layout.dimension()) + ")");
  }
  return layout;
}

ModelSpec spec_from_names(const std::vector<std::string>& names, bool include_interaction) {
  ModelSpec spec;
  spec.n_channels = static_cast<std::size_t>(std::count_if(
      names.begin(), names.end(), [](const std::string& n) { return n.rfind("beta[", 0) == 0; }));
  if (spec.n_channels == 0) throw InvalidInput("draws have no beta[...] columns");
  spec.include_random_effects = std::find(names.begin(), names.end(), "sigma_b") != names.end();
  spec.link = std::find(names.begin(), names.end(), "sigma_y") != names.end() ? Link::identity
                                                                               : Link::logit;
  spec.include_interaction = include_interaction;
  return spec;
}

}  // namespace mta
