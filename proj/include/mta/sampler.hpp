#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mta {

enum class Kernel {
  hmc,          ///< jittered fixed-length Hamiltonian Monte Carlo
  random_walk,  ///< adaptive random-walk Metropolis, gradient-free
};

struct SamplerConfig {
  std::size_t n_chains = 4;
  std::size_t n_warmup = 1000;
  std::size_t n_samples = 1000;
  double target_accept = 0.8;
  std::size_t max_leapfrog_steps = 1024;
  std::uint64_t seed = 1;
  double init_jitter = 2.0;
  /// Jittered starting points drawn per chain; the chain starts from the one
  /// with the highest log density after refinement.
  std::size_t init_candidates = 4;
  /// L-BFGS iterations spent refining each candidate (0 = use it as drawn).
  /// Skipped when the target has no gradient.
  std::size_t init_optimizer_iterations = 200;
  /// Mean integration time of a trajectory in mass-scaled units. The step
  /// count is drawn uniformly from [1, L] with L * step_size = 2 * this.
  double trajectory_length = 1.5;
  Kernel kernel = Kernel::hmc;
  /// Worker threads for chains; 0 picks std::thread::hardware_concurrency().
  std::size_t n_threads = 0;
};

void validate_sampler_config(const SamplerConfig& config);

/// Log density over an unconstrained vector. Both callbacks are invoked
/// concurrently from chain threads.
struct Target {
  std::size_t dimension = 0;
  std::function<double(std::span<const double>)> log_density;
  /// Returns the log density and fills the gradient.
  std::function<double(std::span<const double>, std::span<double>)> log_density_gradient;
};

struct ChainStats {
  double accept_rate = 0.0;  ///< mean acceptance statistic over sampling
  std::size_t divergences = 0;
  double step_size = 0.0;
  std::vector<double> inverse_mass;  ///< diagonal
  std::size_t leapfrog_steps = 0;    ///< total during sampling
};

/// Draws stored chain-major: value(chain, iter, param).
struct PosteriorDraws {
  std::vector<std::string> names;
  std::size_t n_chains = 0;
  std::size_t n_samples = 0;
  std::vector<double> values;
  std::vector<ChainStats> chains;

  std::size_t n_params() const { return names.size(); }
  std::size_t total_draws() const { return n_chains * n_samples; }
  double value(std::size_t chain, std::size_t iter, std::size_t param) const {
    return values[(chain * n_samples + iter) * names.size() + param];
  }
  std::span<const double> draw(std::size_t chain, std::size_t iter) const {
    return {values.data() + (chain * n_samples + iter) * names.size(), names.size()};
  }
  /// All draws of one parameter, chain-major.
  std::vector<double> column(std::size_t param) const;
  /// Index of `name` in names; throws InvalidInput if absent.
  std::size_t index_of(const std::string& name) const;
};

/// Runs n_chains independent chains on `target`. Draws are reported in the
/// target's own coordinates with names x[0], x[1], ...
///
/// Chain k uses RNG stream k of config.seed, so the output does not depend on
/// the number of worker threads.
PosteriorDraws run_sampler(const Target& target, const SamplerConfig& config);

}  // namespace mta
