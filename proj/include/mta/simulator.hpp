#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mta/model.hpp"
#include "mta/rng.hpp"

namespace mta {

struct SimConfig {
  std::size_t n_journeys = 10000;
  std::size_t n_channels = 5;
  std::size_t touches_per_journey = 10;
  double inter_event_rate = 1.0;
  Link link = Link::identity;
  std::uint64_t seed = 1;
  double sigma_y = 0.1;
  /// Replaces the sampled ground truth when set; sigma_y always comes from
  /// the field above.
  std::optional<ModelParams> param_overrides;
};

void validate_sim_config(const SimConfig& config);

/// Ground truth drawn as beta ~ U(0,1), gamma ~ N(0,1), lambda ~ Beta(1,1);
/// mu = 0, no random effects, sigma_y from the config.
ModelParams sample_true_params(const SimConfig& config, Rng& rng);

struct SimulatedData {
  std::vector<Journey> journeys;
  ModelParams truth;
  ModelSpec spec;
};

/// Journey i uses RNG stream i + 1 of the seed (stream 0 draws the truth), so
/// datasets are identical however they are generated.
SimulatedData simulate_dataset(const SimConfig& config);

}  // namespace mta
