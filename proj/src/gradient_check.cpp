#include "mta/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "mta/rng.hpp"

namespace mta {

std::vector<double> finite_difference_gradient(const Posterior& posterior,
                                               std::span<const double> theta, double step) {
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> out(theta.size());
  auto central = [&](std::size_t d, double h) {
    const double saved = x[d];
    x[d] = saved + h;
    const long double up = posterior.log_density_extended(x);
    x[d] = saved - h;
    const long double down = posterior.log_density_extended(x);
    x[d] = saved;
    // Use the step actually represented in floating point.
    const long double span = static_cast<long double>(saved + h) - static_cast<long double>(saved - h);
    return (up - down) / span;
  };
  for (std::size_t d = 0; d < x.size(); ++d) {
    const long double coarse = central(d, step);
    const long double fine = central(d, 0.5 * step);
    out[d] = static_cast<double>((4.0L * fine - coarse) / 3.0L);
  }
  return out;
}

bool gradient_coordinate_ok(double analytic, double numeric, const GradientTolerance& tol) {
  if (!std::isfinite(analytic) || !std::isfinite(numeric)) return false;
  const double diff = std::abs(analytic - numeric);
  if (std::abs(analytic) > tol.small) {
    return diff <= tol.relative * std::max(std::abs(analytic), std::abs(numeric));
  }
  return diff <= tol.absolute;
}

namespace {

std::vector<Journey> random_dataset(std::size_t n_journeys, std::size_t n_channels, Link link,
                                    Rng& rng) {
  std::vector<Journey> data;
  for (std::size_t i = 0; i < n_journeys; ++i) {
    Journey j;
    j.customer_id = "g" + std::to_string(i);
    const std::size_t k = 1 + rng.below(6);
    double t = 0.0;
    for (std::size_t m = 0; m < k; ++m) {
      if (m > 0) t += rng.exponential(1.0);
      j.touches.push_back({static_cast<ChannelId>(rng.below(n_channels)), t});
    }
    j.eval_time = t + (rng.bernoulli(0.5) ? rng.exponential(1.0) : 0.0);
    j.outcome = link == Link::logit ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : rng.normal(0.0, 1.5);
    data.push_back(std::move(j));
  }
  return data;
}

}  // namespace

GradientCheckResult check_gradients(const GradientCheckConfig& config) {
  GradientCheckResult result;
  for (Link link : {Link::identity, Link::logit}) {
    ModelSpec spec;
    spec.n_channels = config.n_channels;
    spec.link = link;
    spec.include_random_effects = config.random_effects;
    spec.include_interaction = true;
    Rng rng(config.seed, link == Link::identity ? 0 : 1);

    for (std::size_t point = 0; point < config.points; ++point) {
      const std::vector<Journey> data = random_dataset(config.n_journeys, config.n_channels, link, rng);
      const Posterior posterior(data, PriorConfig{}, spec);
      std::vector<double> theta(posterior.dimension());
      for (double& v : theta) v = rng.uniform(-2.0, 2.0);

      std::vector<double> analytic(theta.size());
      posterior.log_density_gradient(theta, analytic);
      const std::vector<double> numeric =
          finite_difference_gradient(posterior, theta, config.tolerance.step);
      const std::vector<std::string> names = posterior.layout().names();

      for (std::size_t d = 0; d < theta.size(); ++d) {
        const double diff = std::abs(analytic[d] - numeric[d]);
        if (std::abs(analytic[d]) > config.tolerance.small) {
          result.max_relative_error =
              std::max(result.max_relative_error,
                       diff / std::max(std::abs(analytic[d]), std::abs(numeric[d])));
        } else {
          result.max_absolute_error_small = std::max(result.max_absolute_error_small, diff);
        }
        if (!gradient_coordinate_ok(analytic[d], numeric[d], config.tolerance)) {
          result.failures.push_back({to_string(link), point, names[d], analytic[d], numeric[d]});
        }
        ++result.coordinates_checked;
      }
      ++result.points_checked;
    }
  }
  return result;
}

}  // namespace mta
