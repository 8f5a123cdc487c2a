#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mta/model.hpp"
#include "mta/sampler.hpp"

namespace mta {

/// predict(journey) - predict(journey without every touch of `channel`).
/// A journey stripped of all touches predicts g(mu + b).
double removal_effect(const Journey& journey, const ModelParams& params,
                      const ModelSpec& spec, ChannelId channel, std::size_t customer = 0);

struct ChannelAttribution {
  std::string name;
  std::vector<double> draws;  ///< summed removal effect per posterior draw
  double mean = 0.0;
  double sd = 0.0;
  double q025 = 0.0;
  double q975 = 0.0;
};

struct AttributionReport {
  std::vector<ChannelAttribution> channels;
  std::size_t n_journeys = 0;
  Link link = Link::logit;
  std::size_t n_draws = 0;
};

struct AttributionOptions {
  /// Posterior draws are thinned evenly down to at most this many; 0 keeps all.
  std::size_t max_draws = 500;
  /// Display names; defaults to "channel_<id>".
  std::vector<std::string> channel_names;
  std::size_t n_threads = 0;
};

/// Indices of the draws kept by even thinning of `total` down to `max_draws`.
std::vector<std::size_t> thinned_indices(std::size_t total, std::size_t max_draws);

/// Per draw d and channel c: sum over journeys of removal_effect. `draws` must
/// hold the constrained columns of `spec` for this dataset. Each draw is reduced
/// over journeys in dataset order, so the result does not depend on threading.
AttributionReport attribute(std::span<const Journey> dataset, const PosteriorDraws& draws,
                            const ModelSpec& spec, const AttributionOptions& options = {});

}  // namespace mta
