#include "mta/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include "mta/errors.hpp"
#include "mta/rng.hpp"

namespace mta {

void validate_sampler_config(const SamplerConfig& config) {
  if (config.n_chains < 1) throw InvalidInput("n_chains must be >= 1");
  if (config.n_samples < 1) throw InvalidInput("n_samples must be >= 1");
  if (!(config.target_accept > 0.0 && config.target_accept < 1.0)) {
    throw InvalidInput("target_accept must lie in (0, 1)");
  }
  if (config.max_leapfrog_steps < 1) throw InvalidInput("max_leapfrog_steps must be >= 1");
  if (!(config.init_jitter >= 0.0)) throw InvalidInput("init_jitter must be >= 0");
  if (!(config.trajectory_length > 0.0)) throw InvalidInput("trajectory_length must be > 0");
  if (config.init_candidates < 1) throw InvalidInput("init_candidates must be >= 1");
}

std::vector<double> PosteriorDraws::column(std::size_t param) const {
  std::vector<double> out;
  out.reserve(total_draws());
  for (std::size_t c = 0; c < n_chains; ++c) {
    for (std::size_t i = 0; i < n_samples; ++i) out.push_back(value(c, i, param));
  }
  return out;
}

std::size_t PosteriorDraws::index_of(const std::string& name) const {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidInput("draws have no parameter '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

namespace {

constexpr double kDivergenceThreshold = 1000.0;
constexpr std::size_t kInitAttempts = 100;

struct Window {
  std::size_t begin;
  std::size_t end;  // exclusive
};

// Expanding mass-matrix windows between an initial fast buffer and a terminal
// step-size-only buffer (75 / 25 doubling / 50 at the default warmup length).
std::vector<Window> mass_windows(std::size_t n_warmup) {
  std::vector<Window> windows;
  if (n_warmup < 20) return windows;
  std::size_t init_buffer = 75;
  std::size_t term_buffer = 50;
  std::size_t base_window = 25;
  if (init_buffer + term_buffer + base_window > n_warmup) {
    init_buffer = static_cast<std::size_t>(0.15 * static_cast<double>(n_warmup));
    term_buffer = static_cast<std::size_t>(0.1 * static_cast<double>(n_warmup));
    base_window = n_warmup - init_buffer - term_buffer;
  }
  const std::size_t last = n_warmup - term_buffer;
  std::size_t begin = init_buffer;
  std::size_t size = base_window;
  while (begin < last) {
    std::size_t end = begin + size;
    if (end + 2 * size > last) end = last;
    windows.push_back({begin, end});
    begin = end;
    size *= 2;
  }
  return windows;
}

class DualAveraging {
 public:
  DualAveraging(double target, double step_size) : target_(target) { restart(step_size); }

  void restart(double step_size) {
    mu_ = std::log(10.0 * step_size);
    counter_ = 0;
    h_bar_ = 0.0;
    log_step_bar_ = 0.0;
  }

  // Returns the step size to use next.
  double update(double accept_stat) {
    constexpr double kGamma = 0.05;
    constexpr double kT0 = 10.0;
    constexpr double kKappa = 0.75;
    ++counter_;
    const double t = static_cast<double>(counter_);
    const double frac = 1.0 / (t + kT0);
    h_bar_ = (1.0 - frac) * h_bar_ + frac * (target_ - accept_stat);
    const double log_step = mu_ - std::sqrt(t) / kGamma * h_bar_;
    const double eta = std::pow(t, -kKappa);
    log_step_bar_ = eta * log_step + (1.0 - eta) * log_step_bar_;
    return std::exp(log_step);
  }

  double final_step_size() const { return std::exp(log_step_bar_); }

 private:
  double target_;
  double mu_ = 0.0;
  std::size_t counter_ = 0;
  double h_bar_ = 0.0;
  double log_step_bar_ = 0.0;
};

class VarianceEstimator {
 public:
  explicit VarianceEstimator(std::size_t dim) : mean_(dim, 0.0), m2_(dim, 0.0) {}

  void add(std::span<const double> x) {
    ++count_;
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double delta = x[d] - mean_[d];
      mean_[d] += delta / static_cast<double>(count_);
      m2_[d] += delta * (x[d] - mean_[d]);
    }
  }

  // Sample variance shrunk toward 1e-3, as in common PPL warmup.
  std::vector<double> regularized() const {
    const double n = static_cast<double>(count_);
    std::vector<double> out(mean_.size(), 1.0);
    if (count_ < 3) return out;
    for (std::size_t d = 0; d < mean_.size(); ++d) {
      const double var = m2_[d] / (n - 1.0);
      out[d] = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0));
    }
    return out;
  }

  void reset() {
    count_ = 0;
    std::fill(mean_.begin(), mean_.end(), 0.0);
    std::fill(m2_.begin(), m2_.end(), 0.0);
  }

 private:
  std::size_t count_ = 0;
  std::vector<double> mean_;
  std::vector<double> m2_;
};

struct State {
  std::vector<double> q;
  std::vector<double> grad;
  double log_density = 0.0;
};

// Callback evaluation where numeric failures count as zero density.
double safe_log_density_gradient(const Target& target, std::span<const double> q,
                                 std::span<double> grad) {
  try {
    const double lp = target.log_density_gradient(q, grad);
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    for (double g : grad) {
      if (!std::isfinite(g)) return -std::numeric_limits<double>::infinity();
    }
    return lp;
  } catch (const NumericError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double safe_log_density(const Target& target, std::span<const double> q) {
  try {
    const double lp = target.log_density ? target.log_density(q)
                                         : [&] {
                                             std::vector<double> g(q.size());
                                             return target.log_density_gradient(q, g);
                                           }();
    return std::isfinite(lp) ? lp : -std::numeric_limits<double>::infinity();
  } catch (const NumericError&) {
    return -std::numeric_limits<double>::infinity();
  }
}

// Negative log density for the L-BFGS refinement of starting points.
class NegativeLogDensity final : public ceres::FirstOrderFunction {
 public:
  explicit NegativeLogDensity(const Target& target) : target_(target), grad_(target.dimension) {}

  int NumParameters() const override { return static_cast<int>(target_.dimension); }

  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    std::span<const double> q(x, target_.dimension);
    const double lp = safe_log_density_gradient(target_, q, grad_);
    if (!std::isfinite(lp)) return false;
    *cost = -lp;
    if (gradient != nullptr) {
      for (std::size_t d = 0; d < grad_.size(); ++d) gradient[d] = -grad_[d];
    }
    return true;
  }

 private:
  const Target& target_;
  mutable std::vector<double> grad_;
};

void refine(const Target& target, std::size_t iterations, State& state) {
  std::vector<double> x = state.q;
  ceres::GradientProblem problem(new NegativeLogDensity(target));
  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.max_num_iterations = static_cast<int>(iterations);
  options.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(options, problem, x.data(), &summary);
  std::vector<double> grad(x.size());
  const double lp = safe_log_density_gradient(target, x, grad);
  if (std::isfinite(lp) && lp >= state.log_density) {
    state.q = std::move(x);
    state.grad = std::move(grad);
    state.log_density = lp;
  }
}

State draw_start(const Target& target, const SamplerConfig& config, Rng& rng,
                 std::size_t chain) {
  State state;
  state.q.resize(target.dimension);
  state.grad.resize(target.dimension);
  for (std::size_t attempt = 0; attempt < kInitAttempts; ++attempt) {
    for (double& x : state.q) x = rng.uniform(-config.init_jitter, config.init_jitter);
    state.log_density = safe_log_density_gradient(target, state.q, state.grad);
    if (std::isfinite(state.log_density)) return state;
  }
  throw InitializationError("chain " + std::to_string(chain) +
                            ": log density not finite at any of " +
                            std::to_string(kInitAttempts) + " initial points");
}

State initialize(const Target& target, const SamplerConfig& config, Rng& rng,
                 std::size_t chain) {
  const bool optimize = config.init_optimizer_iterations > 0 && target.log_density_gradient &&
                        target.dimension > 0;
  State best;
  for (std::size_t k = 0; k < config.init_candidates; ++k) {
    State state = draw_start(target, config, rng, chain);
    if (optimize) refine(target, config.init_optimizer_iterations, state);
    if (k == 0 || state.log_density > best.log_density) best = std::move(state);
  }
  return best;
}

class HmcChain {
 public:
  HmcChain(const Target& target, const SamplerConfig& config, std::size_t chain)
      : target_(target),
        config_(config),
        rng_(config.seed, chain),
        state_(initialize(target, config, rng_, chain)),
        inverse_mass_(target.dimension, 1.0),
        momentum_(target.dimension),
        proposal_{std::vector<double>(target.dimension),
                  std::vector<double>(target.dimension), 0.0} {}

  void run(std::span<double> out, ChainStats& stats) {
    const std::size_t dim = target_.dimension;
    step_size_ = initial_step_size();
    DualAveraging adapt(config_.target_accept, step_size_);
    VarianceEstimator variance(dim);
    const std::vector<Window> windows = mass_windows(config_.n_warmup);
    std::size_t window = 0;

    for (std::size_t it = 0; it < config_.n_warmup; ++it) {
      const Transition result = transition();
      step_size_ = adapt.update(result.accept_stat);
      if (window < windows.size() && it >= windows[window].begin) {
        variance.add(state_.q);
        if (it + 1 == windows[window].end) {
          inverse_mass_ = variance.regularized();
          variance.reset();
          step_size_ = initial_step_size();
          adapt.restart(step_size_);
          ++window;
        }
      }
    }
    if (config_.n_warmup > 0) step_size_ = adapt.final_step_size();

    double accept_sum = 0.0;
    for (std::size_t it = 0; it < config_.n_samples; ++it) {
      const Transition result = transition();
      accept_sum += result.accept_stat;
      stats.divergences += result.divergent ? 1 : 0;
      stats.leapfrog_steps += result.steps;
      std::copy(state_.q.begin(), state_.q.end(), out.begin() + it * dim);
    }
    stats.accept_rate = accept_sum / static_cast<double>(config_.n_samples);
    stats.step_size = step_size_;
    stats.inverse_mass = inverse_mass_;
  }

 private:
  struct Transition {
    double accept_stat = 0.0;
    bool divergent = false;
    std::size_t steps = 0;
  };

  void sample_momentum() {
    for (std::size_t d = 0; d < momentum_.size(); ++d) {
      momentum_[d] = rng_.normal() / std::sqrt(inverse_mass_[d]);
    }
  }

  double kinetic() const {
    double k = 0.0;
    for (std::size_t d = 0; d < momentum_.size(); ++d) {
      k += momentum_[d] * momentum_[d] * inverse_mass_[d];
    }
    return 0.5 * k;
  }

  // One leapfrog step of `proposal_`; returns false on a non-finite density.
  bool leapfrog(double eps) {
    auto& q = proposal_.q;
    auto& grad = proposal_.grad;
    for (std::size_t d = 0; d < q.size(); ++d) momentum_[d] += 0.5 * eps * grad[d];
    for (std::size_t d = 0; d < q.size(); ++d) q[d] += eps * inverse_mass_[d] * momentum_[d];
    proposal_.log_density = safe_log_density_gradient(target_, q, grad);
    if (!std::isfinite(proposal_.log_density)) return false;
    for (std::size_t d = 0; d < q.size(); ++d) momentum_[d] += 0.5 * eps * grad[d];
    return true;
  }

  Transition transition() {
    Transition result;
    const std::size_t max_steps = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(2.0 * config_.trajectory_length / step_size_)),
        1, config_.max_leapfrog_steps);
    const std::size_t n_steps = 1 + static_cast<std::size_t>(rng_.below(max_steps));

    sample_momentum();
    const double h0 = -state_.log_density + kinetic();
    proposal_.q = state_.q;
    proposal_.grad = state_.grad;
    proposal_.log_density = state_.log_density;

    double h1 = h0;
    for (std::size_t s = 0; s < n_steps; ++s) {
      ++result.steps;
      const bool finite = leapfrog(step_size_);
      h1 = finite ? -proposal_.log_density + kinetic()
                  : std::numeric_limits<double>::infinity();
      if (!std::isfinite(h1) || h1 - h0 > kDivergenceThreshold) {
        result.divergent = true;
        result.accept_stat = 0.0;
        return result;
      }
    }
    const double log_ratio = h0 - h1;
    result.accept_stat = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
    if (rng_.uniform() < result.accept_stat) std::swap(state_, proposal_);
    return result;
  }

  // Doubles or halves the step size until a single leapfrog step crosses an
  // acceptance probability of 0.8.
  double initial_step_size() {
    double eps = step_size_ > 0.0 ? step_size_ : 1.0;
    const double log_target = std::log(0.8);
    int direction = 0;
    for (int iter = 0; iter < 100; ++iter) {
      sample_momentum();
      const double h0 = -state_.log_density + kinetic();
      proposal_.q = state_.q;
      proposal_.grad = state_.grad;
      const bool finite = leapfrog(eps);
      const double h1 = finite ? -proposal_.log_density + kinetic()
                               : std::numeric_limits<double>::infinity();
      const double delta = h0 - h1;
      if (direction == 0) direction = delta > log_target ? 1 : -1;
      if (direction == 1 && !(delta > log_target)) break;
      if (direction == -1 && !(delta < log_target)) break;
      eps = direction == 1 ? 2.0 * eps : 0.5 * eps;
      if (eps > 1e7 || eps < 1e-10) break;
    }
    return std::clamp(eps, 1e-10, 1e7);
  }

  const Target& target_;
  const SamplerConfig& config_;
  Rng rng_;
  State state_;
  std::vector<double> inverse_mass_;
  std::vector<double> momentum_;
  State proposal_;
  double step_size_ = 0.0;
};

class RandomWalkChain {
 public:
  RandomWalkChain(const Target& target, const SamplerConfig& config, std::size_t chain)
      : target_(target),
        config_(config),
        rng_(config.seed, chain),
        state_(initialize(target, config, rng_, chain)),
        scale_(std::vector<double>(target.dimension, 1.0)),
        proposal_(target.dimension) {}

  void run(std::span<double> out, ChainStats& stats) {
    const std::size_t dim = target_.dimension;
    const double goal = dim == 1 ? 0.44 : 0.234;
    double log_jump = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
    VarianceEstimator variance(dim);
    const std::vector<Window> windows = mass_windows(config_.n_warmup);
    std::size_t window = 0;
    std::size_t adapt_count = 0;

    // Robbins-Monro on log jump; sampling uses its average since the last
    // scale update.
    double log_jump_sum = 0.0;
    for (std::size_t it = 0; it < config_.n_warmup; ++it) {
      const double accept = step(std::exp(log_jump));
      ++adapt_count;
      log_jump += (accept - goal) / std::pow(static_cast<double>(adapt_count) + 10.0, 0.6);
      log_jump_sum += log_jump;
      if (window < windows.size() && it >= windows[window].begin) {
        variance.add(state_.q);
        if (it + 1 == windows[window].end) {
          scale_ = variance.regularized();
          variance.reset();
          adapt_count = 0;
          log_jump_sum = 0.0;
          ++window;
        }
      }
    }
    if (adapt_count > 0) log_jump = log_jump_sum / static_cast<double>(adapt_count);

    double accept_sum = 0.0;
    for (std::size_t it = 0; it < config_.n_samples; ++it) {
      accept_sum += step(std::exp(log_jump));
      std::copy(state_.q.begin(), state_.q.end(), out.begin() + it * dim);
    }
    stats.accept_rate = accept_sum / static_cast<double>(config_.n_samples);
    stats.step_size = std::exp(log_jump);
    stats.inverse_mass = scale_;
  }

 private:
  double step(double jump) {
    for (std::size_t d = 0; d < proposal_.size(); ++d) {
      proposal_[d] = state_.q[d] + jump * std::sqrt(scale_[d]) * rng_.normal();
    }
    const double lp = safe_log_density(target_, proposal_);
    const double log_ratio = lp - state_.log_density;
    const double accept = std::isfinite(lp) ? (log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio))
                                            : 0.0;
    if (rng_.uniform() < accept) {
      state_.q.swap(proposal_);
      state_.log_density = lp;
    }
    return accept;
  }

  const Target& target_;
  const SamplerConfig& config_;
  Rng rng_;
  State state_;
  std::vector<double> scale_;
  std::vector<double> proposal_;
};

}  // namespace

PosteriorDraws run_sampler(const Target& target, const SamplerConfig& config) {
  validate_sampler_config(config);
  if (target.dimension == 0) throw InvalidInput("target dimension must be positive");
  if (!target.log_density_gradient) throw InvalidInput("target needs a gradient callback");

  PosteriorDraws draws;
  draws.n_chains = config.n_chains;
  draws.n_samples = config.n_samples;
  draws.names.reserve(target.dimension);
  for (std::size_t d = 0; d < target.dimension; ++d) {
    draws.names.push_back("x[" + std::to_string(d) + "]");
  }
  draws.values.assign(config.n_chains * config.n_samples * target.dimension, 0.0);
  draws.chains.resize(config.n_chains);

  const std::size_t per_chain = config.n_samples * target.dimension;
  auto run_chain = [&](std::size_t chain) {
    std::span<double> out(draws.values.data() + chain * per_chain, per_chain);
    if (config.kernel == Kernel::hmc) {
      HmcChain(target, config, chain).run(out, draws.chains[chain]);
    } else {
      RandomWalkChain(target, config, chain).run(out, draws.chains[chain]);
    }
  };

  std::size_t n_threads = config.n_threads;
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, config.n_chains);

  if (n_threads <= 1) {
    for (std::size_t c = 0; c < config.n_chains; ++c) run_chain(c);
    return draws;
  }

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t c = next++; c < config.n_chains; c = next++) {
          try {
            run_chain(c);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return draws;
}

}  // namespace mta
