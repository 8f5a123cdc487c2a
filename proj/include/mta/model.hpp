#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace mta {

using ChannelId = std::size_t;

struct Channel {
  ChannelId id = 0;
  std::string name;
};

/// One interaction with a marketing channel. Time is in days since the start
/// of the journey.
struct Touch {
  ChannelId channel = 0;
  double time = 0.0;

  friend bool operator==(const Touch&, const Touch&) = default;
};

/// A customer's ordered touches and the outcome observed at `eval_time`.
struct Journey {
  std::string customer_id;
  std::vector<Touch> touches;
  double outcome = 0.0;
  double eval_time = 0.0;

  friend bool operator==(const Journey&, const Journey&) = default;
};

enum class Link { identity, logit };

std::string to_string(Link link);
Link link_from_string(const std::string& name);

struct ModelSpec {
  std::size_t n_channels = 1;
  Link link = Link::logit;
  bool include_random_effects = false;
  bool include_interaction = true;
};

struct ModelParams {
  double mu = 0.0;
  double gamma = 0.0;
  std::vector<double> beta;    // >= 0, one per channel
  std::vector<double> lambda;  // in (0, 1), one per channel
  std::vector<double> b;       // one per customer when random effects are on
  double sigma_b = 1.0;
  double sigma_y = 1.0;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Throws InvalidInput unless the journey is well formed for `n_channels`.
void validate_journey(const Journey& journey, std::size_t n_channels);
/// Throws InvalidInput unless the parameters satisfy their constraints.
void validate_params(const ModelParams& params, const ModelSpec& spec);

/// Decay factor lambda^elapsed, evaluated as exp(elapsed * ln lambda).
double decay(double lambda, double elapsed);

/// Linear predictor for an arbitrary (possibly empty) touch set evaluated at
/// `eval_time`:
///
///   mu + b + sum_i w_i + gamma * sum_{i != j} w_i w_j,
///   w_i = beta[a_i] * lambda[a_i]^(eval_time - t_i)
///
/// where the pair sum runs over ordered pairs. `random_effect` is the b term
/// and is ignored unless the spec enables random effects.
double linear_predictor(std::span<const Touch> touches, double eval_time,
                        const ModelParams& params, const ModelSpec& spec,
                        double random_effect = 0.0);

/// Linear predictor of `journey`; the random effect is params.b[customer].
double linear_predictor(const Journey& journey, const ModelParams& params,
                        const ModelSpec& spec, std::size_t customer = 0);

double apply_link(double eta, Link link);

double predict(const Journey& journey, const ModelParams& params,
               const ModelSpec& spec, std::size_t customer = 0);

/// Numerically stable log(1 + e^x).
double softplus(double x);
/// log(sigmoid(x)) without forming sigmoid(x).
inline double log_sigmoid(double x) { return -softplus(-x); }
double sigmoid(double x);

/// Half-life in days of a decay rate: ln(0.5) / ln(lambda).
double half_life(double lambda);

}  // namespace mta
