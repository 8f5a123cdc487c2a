#include "mta/model.hpp"

#include <cmath>
#include <sstream>

#include "mta/errors.hpp"

namespace mta {

std::string to_string(Link link) {
  return link == Link::identity ? "identity" : "logit";
}

Link link_from_string(const std::string& name) {
  if (name == "identity") return Link::identity;
  if (name == "logit") return Link::logit;
  throw InvalidInput("unknown link '" + name + "' (expected identity|logit)");
}

void validate_journey(const Journey& journey, std::size_t n_channels) {
  const auto fail = [&](const std::string& what) {
    throw InvalidInput("journey '" + journey.customer_id + "': " + what);
  };
  if (journey.touches.empty()) fail("has no touches");
  double previous = 0.0;
  for (const Touch& touch : journey.touches) {
    if (touch.channel >= n_channels) {
      fail("channel id " + std::to_string(touch.channel) + " out of range [0, " +
           std::to_string(n_channels) + ")");
    }
    if (!std::isfinite(touch.time) || touch.time < 0.0) {
      fail("touch time must be finite and non-negative");
    }
    if (touch.time < previous) fail("touches are not sorted by time");
    previous = touch.time;
  }
  if (!std::isfinite(journey.eval_time) || journey.eval_time < previous) {
    fail("eval_time precedes the last touch");
  }
  if (!std::isfinite(journey.outcome)) fail("outcome is not finite");
}

void validate_params(const ModelParams& params, const ModelSpec& spec) {
  if (spec.n_channels == 0) throw InvalidInput("model needs at least one channel");
  if (params.beta.size() != spec.n_channels ||
      params.lambda.size() != spec.n_channels) {
    throw InvalidInput("beta/lambda must have one entry per channel");
  }
  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    if (!(params.beta[c] >= 0.0) || !std::isfinite(params.beta[c])) {
      throw InvalidInput("beta[" + std::to_string(c) + "] must be finite and >= 0");
    }
    if (!(params.lambda[c] > 0.0 && params.lambda[c] < 1.0)) {
      throw InvalidInput("lambda[" + std::to_string(c) + "] must lie in (0, 1)");
    }
  }
  if (!std::isfinite(params.mu) || !std::isfinite(params.gamma)) {
    throw InvalidInput("mu and gamma must be finite");
  }
  if (!(params.sigma_b > 0.0) || !(params.sigma_y > 0.0)) {
    throw InvalidInput("sigma_b and sigma_y must be positive");
  }
}

double decay(double lambda, double elapsed) {
  return std::exp(elapsed * std::log(lambda));
}

double linear_predictor(std::span<const Touch> touches, double eval_time,
                        const ModelParams& params, const ModelSpec& spec,
                        double random_effect) {
  double main_sum = 0.0;
  double square_sum = 0.0;
  for (const Touch& touch : touches) {
    if (touch.channel >= spec.n_channels || touch.channel >= params.beta.size()) {
      throw InvalidInput("channel id " + std::to_string(touch.channel) +
                         " out of range [0, " + std::to_string(spec.n_channels) +
                         ")");
    }
    const double w = params.beta[touch.channel] *
                     decay(params.lambda[touch.channel], eval_time - touch.time);
    main_sum += w;
    square_sum += w * w;
  }
  double eta = params.mu + main_sum;
  if (spec.include_random_effects) eta += random_effect;
  // Ordered pairs i != j: (sum w)^2 - sum w^2.
  if (spec.include_interaction) {
    eta += params.gamma * (main_sum * main_sum - square_sum);
  }
  if (!std::isfinite(eta)) {
    std::ostringstream msg;
    msg << "non-finite linear predictor (mu=" << params.mu
        << ", gamma=" << params.gamma << ", b=" << random_effect
        << ", touches=" << touches.size() << ")";
    throw NumericError(msg.str());
  }
  return eta;
}

double linear_predictor(const Journey& journey, const ModelParams& params,
                        const ModelSpec& spec, std::size_t customer) {
  double b = 0.0;
  if (spec.include_random_effects) {
    if (customer >= params.b.size()) {
      throw InvalidInput("no random effect for customer index " +
                         std::to_string(customer));
    }
    b = params.b[customer];
  }
  return linear_predictor(journey.touches, journey.eval_time, params, spec, b);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double apply_link(double eta, Link link) {
  return link == Link::logit ? sigmoid(eta) : eta;
}

double predict(const Journey& journey, const ModelParams& params,
               const ModelSpec& spec, std::size_t customer) {
  return apply_link(linear_predictor(journey, params, spec, customer), spec.link);
}

double half_life(double lambda) { return std::log(0.5) / std::log(lambda); }

}  // namespace mta
