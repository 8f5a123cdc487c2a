#include "mta/likelihood.hpp"

#include <cmath>
#include <numbers>

#include "mta/errors.hpp"

namespace mta {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // 0.5 * log(2 pi)

template <typename Real>
Real softplus_t(Real x) {
  return x > Real(0) ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <typename Real>
Real normal_log_density(Real x, Real mean, Real sd) {
  const Real z = (x - mean) / sd;
  return -Real(kHalfLogTwoPi) - std::log(sd) - Real(0.5) * z * z;
}

}  // namespace

void validate_priors(const PriorConfig& priors) {
  const double fields[] = {priors.sigma_b_rate, priors.beta_scale, priors.gamma_sd,
                           priors.mu_sd, priors.sigma_y_scale};
  for (double v : fields) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidInput("prior hyperparameters must be finite and positive");
    }
  }
}

std::vector<std::string> ParameterLayout::names() const {
  std::vector<std::string> out;
  out.reserve(dimension());
  out.emplace_back("mu");
  out.emplace_back("gamma");
  for (std::size_t c = 0; c < n_channels; ++c) out.push_back("beta[" + std::to_string(c) + "]");
  for (std::size_t c = 0; c < n_channels; ++c) out.push_back("lambda[" + std::to_string(c) + "]");
  if (random_effects) {
    out.emplace_back("sigma_b");
    for (std::size_t i = 0; i < n_customers; ++i) out.push_back("b[" + std::to_string(i) + "]");
  }
  if (observation_noise) out.emplace_back("sigma_y");
  return out;
}

ParameterLayout make_layout(const ModelSpec& spec, std::size_t n_customers) {
  if (spec.n_channels == 0) throw InvalidInput("model needs at least one channel");
  ParameterLayout layout;
  layout.n_channels = spec.n_channels;
  layout.random_effects = spec.include_random_effects;
  layout.n_customers = spec.include_random_effects ? n_customers : 0;
  layout.observation_noise = spec.link == Link::identity;
  return layout;
}

ParameterLayout layout_for_dimension(const ModelSpec& spec, std::size_t dimension) {
  ParameterLayout layout = make_layout(spec, 0);
  const std::size_t fixed = layout.dimension();
  if (dimension < fixed || (!spec.include_random_effects && dimension != fixed)) {
    throw InvalidInput("unconstrained vector of length " + std::to_string(dimension) +
                       " does not match the model (expected " +
                       (spec.include_random_effects ? "at least " : "") +
                       std::to_string(fixed) + ")");
  }
  layout.n_customers = dimension - fixed;
  return layout;
}

UnconstrainedVector to_unconstrained(const ModelParams& params, const ModelSpec& spec) {
  validate_params(params, spec);
  const ParameterLayout layout = make_layout(spec, params.b.size());
  UnconstrainedVector out;
  out.theta.assign(layout.dimension(), 0.0);
  auto& theta = out.theta;
  theta[ParameterLayout::mu] = params.mu;
  theta[ParameterLayout::gamma] = params.gamma;
  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    if (params.beta[c] <= 0.0) {
      throw InvalidInput("beta[" + std::to_string(c) +
                         "] = 0 has no unconstrained representation");
    }
    theta[layout.beta(c)] = std::log(params.beta[c]);
    const double lam = params.lambda[c];
    theta[layout.lambda(c)] = std::log(lam) - std::log1p(-lam);
  }
  if (layout.random_effects) {
    theta[layout.sigma_b()] = std::log(params.sigma_b);
    for (std::size_t i = 0; i < layout.n_customers; ++i) {
      theta[layout.b(i)] = params.b[i] / params.sigma_b;
    }
  }
  if (layout.observation_noise) theta[layout.sigma_y()] = std::log(params.sigma_y);
  return out;
}

ModelParams to_constrained(std::span<const double> theta, const ModelSpec& spec) {
  const ParameterLayout layout = layout_for_dimension(spec, theta.size());
  ModelParams p;
  p.mu = theta[ParameterLayout::mu];
  p.gamma = theta[ParameterLayout::gamma];
  p.beta.resize(spec.n_channels);
  p.lambda.resize(spec.n_channels);
  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    p.beta[c] = std::exp(theta[layout.beta(c)]);
    p.lambda[c] = sigmoid(theta[layout.lambda(c)]);
  }
  if (layout.random_effects) {
    p.sigma_b = std::exp(theta[layout.sigma_b()]);
    p.b.resize(layout.n_customers);
    for (std::size_t i = 0; i < layout.n_customers; ++i) {
      p.b[i] = p.sigma_b * theta[layout.b(i)];
    }
  }
  if (layout.observation_noise) p.sigma_y = std::exp(theta[layout.sigma_y()]);
  return p;
}

ModelParams to_constrained(const UnconstrainedVector& theta, const ModelSpec& spec) {
  return to_constrained(std::span<const double>(theta.theta), spec);
}

void validate_dataset(std::span<const Journey> dataset, const ModelSpec& spec) {
  for (const Journey& journey : dataset) {
    validate_journey(journey, spec.n_channels);
    if (spec.link == Link::logit && journey.outcome != 0.0 && journey.outcome != 1.0) {
      throw InvalidInput("journey '" + journey.customer_id +
                         "': outcome must be 0 or 1 under the logit link");
    }
  }
}

double log_likelihood(std::span<const Journey> dataset, const ModelParams& params,
                      const ModelSpec& spec) {
  validate_dataset(dataset, spec);
  if (spec.include_random_effects && params.b.size() != dataset.size()) {
    throw InvalidInput("need one random effect per journey");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Journey& journey = dataset[i];
    const double eta = linear_predictor(journey, params, spec, i);
    if (spec.link == Link::logit) {
      total += journey.outcome == 1.0 ? -softplus(-eta) : -softplus(eta);
    } else {
      total += normal_log_density(journey.outcome, eta, params.sigma_y);
    }
  }
  return total;
}

double log_prior(const ModelParams& params, const PriorConfig& priors,
                 const ModelSpec& spec) {
  validate_params(params, spec);
  double lp = normal_log_density(params.mu, 0.0, priors.mu_sd) +
              normal_log_density(params.gamma, 0.0, priors.gamma_sd);
  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    lp += -std::log(priors.beta_scale) - params.beta[c] / priors.beta_scale;
    // Uniform(0, 1) on lambda contributes log 1 = 0.
  }
  if (spec.include_random_effects) {
    lp += std::log(priors.sigma_b_rate) - priors.sigma_b_rate * params.sigma_b;
    for (double b : params.b) lp += normal_log_density(b, 0.0, params.sigma_b);
  }
  if (spec.link == Link::identity) {
    lp += std::numbers::ln2 + normal_log_density(params.sigma_y, 0.0, priors.sigma_y_scale);
  }
  return lp;
}

double log_jacobian(std::span<const double> theta, const ModelSpec& spec) {
  const ParameterLayout layout = layout_for_dimension(spec, theta.size());
  double total = 0.0;
  for (std::size_t c = 0; c < spec.n_channels; ++c) {
    total += theta[layout.beta(c)];
    const double v = theta[layout.lambda(c)];
    total += -softplus(-v) - softplus(v);  // log lambda + log(1 - lambda)
  }
  if (layout.random_effects) {
    // sigma_b itself plus the N scalings b_i = sigma_b * raw_i.
    total += static_cast<double>(layout.n_customers + 1) * theta[layout.sigma_b()];
  }
  if (layout.observation_noise) total += theta[layout.sigma_y()];
  return total;
}

Posterior::Posterior(std::span<const Journey> dataset, PriorConfig priors, ModelSpec spec)
    : priors_(priors), spec_(spec), layout_(make_layout(spec, dataset.size())) {
  validate_priors(priors_);
  validate_dataset(dataset, spec_);
  offsets_.reserve(dataset.size() + 1);
  offsets_.push_back(0);
  outcomes_.reserve(dataset.size());
  for (const Journey& journey : dataset) {
    for (const Touch& touch : journey.touches) {
      channels_.push_back(touch.channel);
      elapsed_.push_back(journey.eval_time - touch.time);
    }
    offsets_.push_back(channels_.size());
    outcomes_.push_back(journey.outcome);
  }
}

template <typename Real>
Real Posterior::evaluate(std::span<const double> theta) const {
  if (theta.size() != layout_.dimension()) {
    throw InvalidInput("theta has length " + std::to_string(theta.size()) +
                       ", expected " + std::to_string(layout_.dimension()));
  }
  const std::size_t n_channels = spec_.n_channels;
  const Real mu = theta[ParameterLayout::mu];
  const Real gamma = theta[ParameterLayout::gamma];

  Real lp = normal_log_density<Real>(mu, 0, priors_.mu_sd) +
            normal_log_density<Real>(gamma, 0, priors_.gamma_sd);

  std::vector<Real> beta(n_channels);
  std::vector<Real> log_lambda(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) {
    const Real u = theta[layout_.beta(c)];
    const Real v = theta[layout_.lambda(c)];
    beta[c] = std::exp(u);
    log_lambda[c] = -softplus_t<Real>(-v);
    lp += -std::log(Real(priors_.beta_scale)) - beta[c] / Real(priors_.beta_scale) + u;
    lp += -softplus_t<Real>(-v) - softplus_t<Real>(v);
  }

  Real sigma_b = 0;
  if (layout_.random_effects) {
    const Real s = theta[layout_.sigma_b()];
    sigma_b = std::exp(s);
    lp += std::log(Real(priors_.sigma_b_rate)) - Real(priors_.sigma_b_rate) * sigma_b + s;
    for (std::size_t i = 0; i < layout_.n_customers; ++i) {
      const Real raw = theta[layout_.b(i)];
      lp += -Real(kHalfLogTwoPi) - Real(0.5) * raw * raw;
    }
  }

  Real sigma_y = 1;
  if (layout_.observation_noise) {
    const Real t = theta[layout_.sigma_y()];
    sigma_y = std::exp(t);
    lp += Real(std::numbers::ln2) +
          normal_log_density<Real>(sigma_y, 0, priors_.sigma_y_scale) + t;
  }

  Real ll = 0;
  for (std::size_t j = 0; j + 1 < offsets_.size(); ++j) {
    Real main_sum = 0;
    Real square_sum = 0;
    for (std::size_t k = offsets_[j]; k < offsets_[j + 1]; ++k) {
      const std::size_t c = channels_[k];
      const Real w = beta[c] * std::exp(Real(elapsed_[k]) * log_lambda[c]);
      main_sum += w;
      square_sum += w * w;
    }
    Real eta = mu + main_sum;
    if (spec_.include_interaction) eta += gamma * (main_sum * main_sum - square_sum);
    if (layout_.random_effects) eta += sigma_b * Real(theta[layout_.b(j)]);
    const Real y = outcomes_[j];
    if (spec_.link == Link::logit) {
      ll += y == Real(1) ? -softplus_t<Real>(-eta) : -softplus_t<Real>(eta);
    } else {
      ll += normal_log_density<Real>(y, eta, sigma_y);
    }
  }
  return lp + ll;
}

double Posterior::log_density(std::span<const double> theta) const {
  return evaluate<double>(theta);
}

long double Posterior::log_density_extended(std::span<const double> theta) const {
  return evaluate<long double>(theta);
}

double Posterior::log_density_gradient(std::span<const double> theta,
                                       std::span<double> gradient) const {
  if (theta.size() != layout_.dimension() || gradient.size() != theta.size()) {
    throw InvalidInput("theta/gradient length does not match the model dimension");
  }
  const std::size_t n_channels = spec_.n_channels;
  const double mu = theta[ParameterLayout::mu];
  const double gamma = theta[ParameterLayout::gamma];
  std::fill(gradient.begin(), gradient.end(), 0.0);

  double lp = normal_log_density(mu, 0.0, priors_.mu_sd) +
              normal_log_density(gamma, 0.0, priors_.gamma_sd);
  gradient[ParameterLayout::mu] = -mu / (priors_.mu_sd * priors_.mu_sd);
  gradient[ParameterLayout::gamma] = -gamma / (priors_.gamma_sd * priors_.gamma_sd);

  std::vector<double> beta(n_channels);
  std::vector<double> lambda(n_channels);
  std::vector<double> one_minus_lambda(n_channels);
  std::vector<double> log_lambda(n_channels);
  for (std::size_t c = 0; c < n_channels; ++c) {
    const double u = theta[layout_.beta(c)];
    const double v = theta[layout_.lambda(c)];
    beta[c] = std::exp(u);
    lambda[c] = sigmoid(v);
    one_minus_lambda[c] = sigmoid(-v);
    log_lambda[c] = -softplus(-v);
    lp += -std::log(priors_.beta_scale) - beta[c] / priors_.beta_scale + u;
    lp += -softplus(-v) - softplus(v);
    gradient[layout_.beta(c)] = 1.0 - beta[c] / priors_.beta_scale;
    gradient[layout_.lambda(c)] = one_minus_lambda[c] - lambda[c];
  }

  double sigma_b = 0.0;
  if (layout_.random_effects) {
    const double s = theta[layout_.sigma_b()];
    sigma_b = std::exp(s);
    lp += std::log(priors_.sigma_b_rate) - priors_.sigma_b_rate * sigma_b + s;
    gradient[layout_.sigma_b()] = 1.0 - priors_.sigma_b_rate * sigma_b;
    for (std::size_t i = 0; i < layout_.n_customers; ++i) {
      const double raw = theta[layout_.b(i)];
      lp += -kHalfLogTwoPi - 0.5 * raw * raw;
      gradient[layout_.b(i)] = -raw;
    }
  }

  double sigma_y = 1.0;
  if (layout_.observation_noise) {
    const double t = theta[layout_.sigma_y()];
    sigma_y = std::exp(t);
    const double scale = priors_.sigma_y_scale;
    lp += std::numbers::ln2 + normal_log_density(sigma_y, 0.0, scale) + t;
    gradient[layout_.sigma_y()] = 1.0 - sigma_y * sigma_y / (scale * scale);
  }

  // Per-touch weights are reused between the value and the gradient pass.
  std::vector<double> weights;
  double ll = 0.0;
  for (std::size_t j = 0; j + 1 < offsets_.size(); ++j) {
    const std::size_t begin = offsets_[j];
    const std::size_t end = offsets_[j + 1];
    weights.resize(end - begin);
    double main_sum = 0.0;
    double square_sum = 0.0;
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t c = channels_[k];
      const double w = beta[c] * std::exp(elapsed_[k] * log_lambda[c]);
      weights[k - begin] = w;
      main_sum += w;
      square_sum += w * w;
    }
    const double pair_sum = main_sum * main_sum - square_sum;
    double eta = mu + main_sum;
    if (spec_.include_interaction) eta += gamma * pair_sum;
    double raw_b = 0.0;
    if (layout_.random_effects) {
      raw_b = theta[layout_.b(j)];
      eta += sigma_b * raw_b;
    }

    // d loglik / d eta
    double residual_grad = 0.0;
    const double y = outcomes_[j];
    if (spec_.link == Link::logit) {
      ll += y == 1.0 ? -softplus(-eta) : -softplus(eta);
      residual_grad = y - sigmoid(eta);
    } else {
      const double resid = (y - eta) / sigma_y;
      ll += -kHalfLogTwoPi - std::log(sigma_y) - 0.5 * resid * resid;
      residual_grad = resid / sigma_y;
      gradient[layout_.sigma_y()] += resid * resid - 1.0;
    }

    gradient[ParameterLayout::mu] += residual_grad;
    if (spec_.include_interaction) gradient[ParameterLayout::gamma] += residual_grad * pair_sum;
    if (layout_.random_effects) {
      gradient[layout_.b(j)] += residual_grad * sigma_b;
      gradient[layout_.sigma_b()] += residual_grad * sigma_b * raw_b;
    }
    for (std::size_t k = begin; k < end; ++k) {
      const std::size_t c = channels_[k];
      const double w = weights[k - begin];
      // d eta / d w_k = 1 + 2 gamma (S - w_k)
      double d_eta_d_w = 1.0;
      if (spec_.include_interaction) d_eta_d_w += 2.0 * gamma * (main_sum - w);
      const double g = residual_grad * d_eta_d_w * w;
      gradient[layout_.beta(c)] += g;
      gradient[layout_.lambda(c)] += g * elapsed_[k] * one_minus_lambda[c];
    }
  }
  return lp + ll;
}

double log_posterior_unconstrained(std::span<const double> theta,
                                   std::span<const Journey> dataset,
                                   const PriorConfig& priors, const ModelSpec& spec) {
  return Posterior(dataset, priors, spec).log_density(theta);
}

std::vector<double> grad_log_posterior(std::span<const double> theta,
                                       std::span<const Journey> dataset,
                                       const PriorConfig& priors,
                                       const ModelSpec& spec) {
  const Posterior posterior(dataset, priors, spec);
  std::vector<double> gradient(theta.size());
  posterior.log_density_gradient(theta, gradient);
  return gradient;
}

}  // namespace mta
