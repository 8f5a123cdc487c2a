#pragma once

#include <string>
#include <vector>

#include "mta/model.hpp"
#include "mta/rng.hpp"

namespace fixture {

inline mta::Journey journey(std::vector<mta::Touch> touches, double outcome = 0.0,
                            double eval_time = -1.0) {
  mta::Journey j;
  j.customer_id = "x";
  j.touches = std::move(touches);
  j.outcome = outcome;
  j.eval_time = eval_time >= 0.0 ? eval_time : (j.touches.empty() ? 0.0 : j.touches.back().time);
  return j;
}

inline std::vector<mta::Journey> random_dataset(mta::Rng& rng, std::size_t n, std::size_t channels,
                                                mta::Link link, std::size_t max_touches = 6) {
  std::vector<mta::Journey> out;
  for (std::size_t i = 0; i < n; ++i) {
    mta::Journey j;
    j.customer_id = "r" + std::to_string(i);
    const std::size_t k = 1 + rng.below(max_touches);
    double t = rng.uniform(0.0, 2.0);
    for (std::size_t m = 0; m < k; ++m) {
      t += m == 0 ? 0.0 : rng.exponential(1.0);
      j.touches.push_back({static_cast<mta::ChannelId>(rng.below(channels)), t});
    }
    j.eval_time = t + rng.uniform(0.0, 1.0);
    j.outcome = link == mta::Link::logit ? static_cast<double>(rng.bernoulli(0.4)) : rng.normal(0.5, 1.0);
    out.push_back(std::move(j));
  }
  return out;
}

inline mta::ModelParams random_params(mta::Rng& rng, const mta::ModelSpec& spec, std::size_t n) {
  mta::ModelParams p;
  p.mu = rng.normal(0.0, 1.0);
  p.gamma = rng.normal(0.0, 0.5);
  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    p.beta.push_back(rng.uniform(0.05, 1.5));
    p.lambda.push_back(rng.uniform(0.05, 0.95));
  }
  if (spec.include_random_effects) {
    p.sigma_b = rng.uniform(0.2, 2.0);
    for (std::size_t i = 0; i < n; ++i) p.b.push_back(rng.normal(0.0, p.sigma_b));
  }
  p.sigma_y = rng.uniform(0.3, 2.0);
  return p;
}

}  // namespace fixture
