#include "mta/simulator.hpp"

#include <cmath>
#include <string>

#include "mta/errors.hpp"

namespace mta {

void validate_sim_config(const SimConfig& config) {
  if (config.n_journeys < 1) throw InvalidInput("n_journeys must be >= 1");
  if (config.n_channels < 1) throw InvalidInput("n_channels must be >= 1");
  if (config.touches_per_journey < 1) throw InvalidInput("touches_per_journey must be >= 1");
  if (!(config.inter_event_rate > 0.0) || !std::isfinite(config.inter_event_rate)) {
    throw InvalidInput("inter_event_rate must be positive");
  }
  if (!(config.sigma_y >= 0.0) || !std::isfinite(config.sigma_y)) {
    throw InvalidInput("sigma_y must be finite and non-negative");
  }
}

ModelParams sample_true_params(const SimConfig& config, Rng& rng) {
  ModelParams p;
  p.beta.resize(config.n_channels);
  p.lambda.resize(config.n_channels);
  for (double& beta : p.beta) beta = rng.uniform();
  p.gamma = rng.normal();
  // Beta(1, 1) is Uniform(0, 1); the open interval keeps lambda valid.
  for (double& lambda : p.lambda) lambda = rng.uniform_open();
  p.mu = 0.0;
  p.sigma_y = config.sigma_y;
  return p;
}

SimulatedData simulate_dataset(const SimConfig& config) {
  validate_sim_config(config);
  SimulatedData out;
  if (config.param_overrides) {
    out.truth = *config.param_overrides;
  } else {
    Rng rng(config.seed, 0);
    out.truth = sample_true_params(config, rng);
  }
  out.truth.sigma_y = config.sigma_y;
  out.spec.n_channels = config.n_channels;
  out.spec.link = config.link;
  out.spec.include_interaction = true;
  out.spec.include_random_effects = !out.truth.b.empty();
  if (out.spec.include_random_effects && out.truth.b.size() != config.n_journeys) {
    throw InvalidInput("random-effect override needs one value per journey");
  }
  if (out.truth.beta.size() != config.n_channels ||
      out.truth.lambda.size() != config.n_channels) {
    throw InvalidInput("parameter override does not match n_channels");
  }

  out.journeys.reserve(config.n_journeys);
  for (std::size_t i = 0; i < config.n_journeys; ++i) {
    Rng rng(config.seed, i + 1);
    Journey journey;
    journey.customer_id = "c" + std::to_string(i);
    journey.touches.reserve(config.touches_per_journey);
    double time = 0.0;
    for (std::size_t k = 0; k < config.touches_per_journey; ++k) {
      if (k > 0) time += rng.exponential(config.inter_event_rate);
      journey.touches.push_back({static_cast<ChannelId>(rng.below(config.n_channels)), time});
    }
    journey.eval_time = time;
    const double eta = linear_predictor(journey, out.truth, out.spec, i);
    if (config.link == Link::identity) {
      journey.outcome = eta + out.truth.sigma_y * rng.normal();
    } else {
      journey.outcome = rng.bernoulli(sigmoid(eta)) ? 1.0 : 0.0;
    }
    out.journeys.push_back(std::move(journey));
  }
  return out;
}

}  // namespace mta
