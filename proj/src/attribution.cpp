#include "mta/attribution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "mta/diagnostics.hpp"
#include "mta/errors.hpp"
#include "mta/fit.hpp"
#include "mta/likelihood.hpp"

namespace mta {

double removal_effect(const Journey& journey, const ModelParams& params,
                      const ModelSpec& spec, ChannelId channel, std::size_t customer) {
  double b = 0.0;
  if (spec.include_random_effects) {
    if (customer >= params.b.size()) {
      throw InvalidInput("no random effect for customer index " + std::to_string(customer));
    }
    b = params.b[customer];
  }
  std::vector<Touch> kept;
  kept.reserve(journey.touches.size());
  for (const Touch& touch : journey.touches) {
    if (touch.channel != channel) kept.push_back(touch);
  }
  if (kept.size() == journey.touches.size()) return 0.0;
  const double with = linear_predictor(journey.touches, journey.eval_time, params, spec, b);
  const double without = linear_predictor(kept, journey.eval_time, params, spec, b);
  return apply_link(with, spec.link) - apply_link(without, spec.link);
}

std::vector<std::size_t> thinned_indices(std::size_t total, std::size_t max_draws) {
  std::vector<std::size_t> out;
  if (max_draws == 0 || total <= max_draws) {
    out.resize(total);
    for (std::size_t i = 0; i < total; ++i) out[i] = i;
    return out;
  }
  out.reserve(max_draws);
  for (std::size_t k = 0; k < max_draws; ++k) out.push_back(k * total / max_draws);
  return out;
}

namespace {

// Removal effects of every channel for one journey, reusing per-touch weights.
// Channels absent from the journey get exactly 0.
void journey_removal_effects(const Journey& journey, const ModelParams& params,
                             const ModelSpec& spec, double random_effect,
                             std::vector<double>& weights, std::vector<double>& accum) {
  const std::size_t k = journey.touches.size();
  weights.resize(k);
  double main_sum = 0.0;
  double square_sum = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const Touch& t = journey.touches[i];
    weights[i] = params.beta[t.channel] * decay(params.lambda[t.channel], journey.eval_time - t.time);
    main_sum += weights[i];
    square_sum += weights[i] * weights[i];
  }
  const double base = params.mu + (spec.include_random_effects ? random_effect : 0.0);
  auto predictor = [&](double s, double q) {
    double eta = base + s;
    if (spec.include_interaction) eta += params.gamma * (s * s - q);
    return eta;
  };
  const double with = apply_link(predictor(main_sum, square_sum), spec.link);

  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    bool present = false;
    double s = 0.0;
    double q = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (journey.touches[i].channel == c) {
        present = true;
      } else {
        s += weights[i];
        q += weights[i] * weights[i];
      }
    }
    if (!present) continue;
    accum[c] += with - apply_link(predictor(s, q), spec.link);
  }
}

}  // namespace

AttributionReport attribute(std::span<const Journey> dataset, const PosteriorDraws& draws,
                            const ModelSpec& spec, const AttributionOptions& options) {
  if (draws.total_draws() == 0) throw InvalidInput("attribution needs at least one draw");
  validate_dataset(dataset, spec);
  const ParameterLayout layout = check_draws_layout(draws, spec, dataset.size());

  const std::vector<std::size_t> kept = thinned_indices(draws.total_draws(), options.max_draws);
  const std::size_t n_channels = spec.n_channels;
  std::vector<double> per_draw(kept.size() * n_channels, 0.0);

  auto work = [&](std::size_t d) {
    const std::size_t flat = kept[d];
    const ModelParams params =
        params_from_draw(draws.draw(flat / draws.n_samples, flat % draws.n_samples), layout);
    std::vector<double> weights;
    std::vector<double> accum(n_channels, 0.0);
    for (std::size_t j = 0; j < dataset.size(); ++j) {
      const double b = layout.random_effects ? params.b[j] : 0.0;
      journey_removal_effects(dataset[j], params, spec, b, weights, accum);
    }
    std::copy(accum.begin(), accum.end(), per_draw.begin() + d * n_channels);
  };

  std::size_t n_threads = options.n_threads;
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, kept.size());
  if (n_threads <= 1) {
    for (std::size_t d = 0; d < kept.size(); ++d) work(d);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t d = next++; d < kept.size(); d = next++) work(d);
      });
    }
  }

  AttributionReport report;
  report.n_journeys = dataset.size();
  report.link = spec.link;
  report.n_draws = kept.size();
  for (std::size_t c = 0; c < n_channels; ++c) {
    ChannelAttribution channel;
    channel.name = c < options.channel_names.size() ? options.channel_names[c]
                                                    : "channel_" + std::to_string(c);
    channel.draws.reserve(kept.size());
    for (std::size_t d = 0; d < kept.size(); ++d) channel.draws.push_back(per_draw[d * n_channels + c]);
    for (double v : channel.draws) {
      if (!std::isfinite(v)) throw NumericError("non-finite attribution for " + channel.name);
    }
    const ParameterSummary s = summarize_values(channel.name, channel.draws);
    channel.mean = s.mean;
    channel.sd = s.sd;
    channel.q025 = s.q025;
    channel.q975 = s.q975;
    report.channels.push_back(std::move(channel));
  }
  return report;
}

}  // namespace mta
