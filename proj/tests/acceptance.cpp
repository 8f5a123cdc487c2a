// Acceptance criteria 1-8. Usage: acceptance <n> [<n> ...]
// Prints one "criterion N: PASS|FAIL ..." line per criterion; exit status is
// nonzero if any requested criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "fixtures.hpp"
#include "oracles.hpp"

#include "mta/attribution.hpp"
#include "mta/diagnostics.hpp"
#include "mta/fit.hpp"
#include "mta/likelihood.hpp"
#include "mta/sampler.hpp"
#include "mta/simulator.hpp"

namespace fs = std::filesystem;
using namespace mta;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool report(int n, bool pass, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << "  " << detail << std::endl;
  return pass;
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Interval {
  double lo, hi, mean;
};

Interval central(std::vector<double> v, double mass) {
  std::sort(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double tail = (1.0 - mass) / 2.0;
  return {quantile_sorted(v, tail), quantile_sorted(v, 1.0 - tail), sum / static_cast<double>(v.size())};
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_normal(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double fraction_below_zero(const std::vector<double>& v) {
  std::size_t k = 0;
  for (double x : v) k += x < 0.0;
  return static_cast<double>(k) / static_cast<double>(v.size());
}

// 1. check-gradients through the CLI: 100 points per link, C=3, N=50, random effects.
bool criterion1() {
  const auto start = Clock::now();
  const int code = shell(std::string(MTA_CLI_PATH) +
                         " check-gradients --points 100 --channels 3 --journeys 50 --seed 1");
  const double elapsed = seconds_since(start);
  return report(1, code == 0 && elapsed < 60.0,
                "exit " + std::to_string(code) + ", " + fmt(elapsed, 3) + " s (limit 60 s)");
}

// 2. Library log-likelihood vs a naive per-journey, per-ordered-pair oracle.
bool criterion2() {
  Rng rng(2002);
  double worst = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    ModelSpec spec;
    spec.n_channels = 1 + rng.below(4);
    spec.link = rep % 2 ? Link::logit : Link::identity;
    spec.include_interaction = rep % 4 < 3;
    spec.include_random_effects = rep % 3 == 0;
    const std::size_t n = 1 + rng.below(20);
    const auto data = fixture::random_dataset(rng, n, spec.n_channels, spec.link, 8);
    ModelParams p = fixture::random_params(rng, spec, n);
    p.mu = rng.normal(0.0, 1.0);
    p.gamma = rng.normal(0.0, 0.5);
    const double want = oracle::log_likelihood(data, p, spec);
    worst = std::max(worst, std::abs(log_likelihood(data, p, spec) - want));
    // the flattened evaluator used by the sampler
    const Posterior posterior(data, PriorConfig{}, spec);
    const UnconstrainedVector theta = to_unconstrained(p, spec);
    const double ll = posterior.log_density(theta.theta) - log_prior(p, PriorConfig{}, spec) -
                      log_jacobian(theta.theta, spec);
    worst = std::max(worst, std::abs(ll - want));
  }
  return report(2, worst <= 1e-10, "max |difference| " + fmt(worst, 3) + " over 100 datasets (limit 1e-10)");
}

// 3. HMC on a 10-dim standard normal, 4 chains x 1000 draws.
bool criterion3() {
  const auto start = Clock::now();
  Target t;
  t.dimension = 10;
  t.log_density = [](std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s -= 0.5 * v * v;
    return s;
  };
  t.log_density_gradient = [](std::span<const double> x, std::span<double> g) {
    double s = 0.0;
    for (std::size_t d = 0; d < x.size(); ++d) {
      s -= 0.5 * x[d] * x[d];
      g[d] = -x[d];
    }
    return s;
  };
  SamplerConfig config;
  config.n_chains = 4;
  config.n_warmup = 1000;
  config.n_samples = 1000;
  config.seed = 3;
  const PosteriorDraws draws = run_sampler(t, config);
  const Diagnostics diag = diagnostics(draws);
  bool pass = true;
  double worst_mean = 0.0, min_sd = 1e9, max_sd = 0.0;
  for (std::size_t d = 0; d < 10; ++d) {
    const ParameterSummary s = summarize_values("x", draws.column(d));
    worst_mean = std::max(worst_mean, std::abs(s.mean));
    min_sd = std::min(min_sd, s.sd);
    max_sd = std::max(max_sd, s.sd);
  }
  const double ks = ks_normal(draws.column(0));
  const double rhat = diag.max_rhat();
  const double elapsed = seconds_since(start);
  pass = rhat < 1.01 && worst_mean <= 0.05 && min_sd >= 0.95 && max_sd <= 1.05 && ks < 0.02 && elapsed < 120.0;
  return report(3, pass,
                "max R-hat " + fmt(rhat) + ", max |mean| " + fmt(worst_mean, 3) + ", sd in [" + fmt(min_sd) +
                    ", " + fmt(max_sd) + "], KS " + fmt(ks, 3) + ", " + fmt(elapsed, 3) + " s");
}

// 4. Recovery: 10 seeded repetitions of 2000 journeys, C=3, 6 touches.
bool criterion4() {
  constexpr std::size_t kReps = 10;
  constexpr std::size_t kC = 3;
  std::vector<std::size_t> covered(2 * kC, 0);
  std::size_t all_covered_reps = 0;
  double worst_error = 0.0;
  double slowest = 0.0;
  for (std::size_t rep = 1; rep <= kReps; ++rep) {
    const auto start = Clock::now();
    SimConfig sim;
    sim.n_journeys = 2000;
    sim.n_channels = kC;
    sim.touches_per_journey = 6;
    sim.link = Link::identity;
    sim.sigma_y = 0.1;
    sim.seed = rep;
    const SimulatedData data = simulate_dataset(sim);
    SamplerConfig config;
    config.seed = 1000 + rep;
    const PosteriorDraws draws = fit_model(data.journeys, PriorConfig{}, data.spec, config);
    const double rhat = diagnostics(draws).max_rhat();
    bool all = true;
    std::ostringstream line;
    line << "  rep " << rep << ": R-hat " << fmt(rhat);
    for (std::size_t c = 0; c < kC; ++c) {
      for (int kind = 0; kind < 2; ++kind) {
        const std::string name = (kind == 0 ? "beta[" : "lambda[") + std::to_string(c) + "]";
        const double truth = kind == 0 ? data.truth.beta[c] : data.truth.lambda[c];
        const Interval iv = central(draws.column(draws.index_of(name)), 0.90);
        const bool in = iv.lo <= truth && truth <= iv.hi;
        covered[2 * c + kind] += in;
        all = all && in;
        worst_error = std::max(worst_error, std::abs(iv.mean - truth));
        line << "  " << name << " true " << fmt(truth, 3) << " mean " << fmt(iv.mean, 3) << " 90% ["
             << fmt(iv.lo, 3) << ", " << fmt(iv.hi, 3) << "]" << (in ? "" : " MISS");
      }
    }
    all_covered_reps += all;
    slowest = std::max(slowest, seconds_since(start));
    std::cout << line.str() << "  " << fmt(seconds_since(start), 3) << " s" << std::endl;
  }
  const std::size_t min_covered = *std::min_element(covered.begin(), covered.end());
  const bool pass = min_covered >= 8 && worst_error <= 0.1 && slowest < 900.0;
  return report(4, pass,
                "min per-parameter coverage " + std::to_string(min_covered) + "/10 (need 8), reps with all covered " +
                    std::to_string(all_covered_reps) + "/10, max |mean - truth| " + fmt(worst_error, 3) +
                    " (limit 0.1), slowest rep " + fmt(slowest, 3) + " s");
}

// 5. Full-scale sharpness: 10000 journeys, C=5, 10 touches.
bool criterion5() {
  const auto start = Clock::now();
  SimConfig sim;  // 10000 journeys, 5 channels, 10 touches, identity, sigma_y 0.1
  sim.seed = 5;
  const SimulatedData data = simulate_dataset(sim);
  SamplerConfig config;
  config.seed = 5005;
  const PosteriorDraws draws = fit_model(data.journeys, PriorConfig{}, data.spec, config);
  bool pass = true;
  std::size_t checked = 0;
  for (std::size_t c = 0; c < sim.n_channels; ++c) {
    if (data.truth.beta[c] <= 0.2) {
      std::cout << "  channel " << c << " skipped (true beta " << fmt(data.truth.beta[c], 3) << ")\n";
      continue;
    }
    for (int kind = 0; kind < 2; ++kind) {
      const std::string name = (kind == 0 ? "beta[" : "lambda[") + std::to_string(c) + "]";
      const double truth = kind == 0 ? data.truth.beta[c] : data.truth.lambda[c];
      const Interval iv = central(draws.column(draws.index_of(name)), 0.95);
      const double width = iv.hi - iv.lo;
      const double rel = std::abs(iv.mean - truth) / truth;
      const bool ok = width <= 0.05 && rel <= 0.04;
      pass = pass && ok;
      ++checked;
      std::cout << "  " << name << " true " << fmt(truth) << " mean " << fmt(iv.mean) << " 95% width "
                << fmt(width, 3) << " rel error " << fmt(rel, 3) << (ok ? "" : "  FAIL") << "\n";
    }
  }
  const double elapsed = seconds_since(start);
  pass = pass && checked > 0 && elapsed < 7200.0;
  return report(5, pass,
                std::to_string(checked) + " parameters checked (width <= 0.05, rel error <= 4%), max R-hat " +
                    fmt(diagnostics(draws).max_rhat()) + ", " + fmt(elapsed, 4) + " s");
}

// 6. Attribution invariants on a fitted model with an absent channel.
bool criterion6() {
  SimConfig sim;
  sim.n_journeys = 300;
  sim.n_channels = 3;
  sim.touches_per_journey = 4;
  sim.seed = 6;
  const SimulatedData data = simulate_dataset(sim);
  ModelSpec spec = data.spec;
  spec.n_channels = 4;  // channel 3 never appears in the data
  spec.include_interaction = false;
  SamplerConfig config;
  config.n_warmup = 500;
  config.n_samples = 500;
  config.seed = 6006;
  const PosteriorDraws draws = fit_model(data.journeys, PriorConfig{}, spec, config);
  AttributionOptions options;
  options.max_draws = 0;
  const AttributionReport r = attribute(data.journeys, draws, spec, options);
  bool zero = true;
  for (double v : r.channels[3].draws) zero = zero && v == 0.0;

  const ParameterLayout layout = check_draws_layout(draws, spec, data.journeys.size());
  double worst = 0.0;
  std::size_t k = 0;
  for (std::size_t ch = 0; ch < draws.n_chains; ++ch) {
    for (std::size_t i = 0; i < draws.n_samples; ++i, ++k) {
      const ModelParams p = params_from_draw(draws.draw(ch, i), layout);
      double mass = 0.0;
      for (const Journey& j : data.journeys) mass += oracle::predictor(j, p, false) - p.mu;
      double total = 0.0;
      for (const ChannelAttribution& c : r.channels) total += c.draws[k];
      worst = std::max(worst, std::abs(total - mass));
    }
  }
  return report(6, zero && worst <= 1e-8 && k == r.n_draws,
                std::string("absent channel ") + (zero ? "exactly 0" : "NONZERO") + " in " +
                    std::to_string(r.n_draws) + " draws, max |sum - mass| " + fmt(worst, 3) + " (limit 1e-8)");
}

// 7. Logit simulation with gamma = -0.3, mu = -2, 5000 journeys.
bool criterion7() {
  SimConfig sim;
  sim.n_journeys = 5000;
  sim.n_channels = 3;
  sim.touches_per_journey = 5;
  sim.link = Link::logit;
  sim.seed = 7;
  ModelParams truth;
  truth.mu = -2.0;
  truth.gamma = -0.3;
  truth.beta = {0.9, 0.6, 0.8};
  truth.lambda = {0.7, 0.5, 0.8};
  sim.param_overrides = truth;
  const SimulatedData data = simulate_dataset(sim);
  SamplerConfig config;
  config.seed = 7007;
  const PosteriorDraws draws = fit_model(data.journeys, PriorConfig{}, data.spec, config);
  const double p_gamma = fraction_below_zero(draws.column(draws.index_of("gamma")));
  const double p_mu = fraction_below_zero(draws.column(draws.index_of("mu")));
  const Interval g = central(draws.column(draws.index_of("gamma")), 0.95);
  const Interval m = central(draws.column(draws.index_of("mu")), 0.95);
  return report(7, p_gamma > 0.9 && p_mu > 0.95,
                "P(gamma < 0) = " + fmt(p_gamma) + " (need > 0.9, mean " + fmt(g.mean, 3) + "), P(mu < 0) = " +
                    fmt(p_mu) + " (need > 0.95, mean " + fmt(m.mean, 3) + "), max R-hat " +
                    fmt(diagnostics(draws).max_rhat()));
}

// 8. Two identical CLI pipelines produce byte-identical outputs.
bool criterion8() {
  const fs::path root = fs::temp_directory_path() / "mta_acceptance_8";
  fs::remove_all(root);
  const std::string bin = MTA_CLI_PATH;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    const std::string d = dir.string();
    const std::string cmd =
        bin + " simulate --journeys 200 --channels 3 --touches 4 --link logit --seed 11 --out " + d +
        "/data.ndjson > /dev/null 2>&1 && " + bin + " fit --data " + d +
        "/data.ndjson --chains 2 --warmup 200 --samples 200 --seed 12 --allow-nonconverged --draws-out " + d +
        "/draws.csv --diagnostics-out " + d + "/diagnostics.json > /dev/null 2>&1 && " + bin + " attribute --data " + d +
        "/data.ndjson --draws " + d + "/draws.csv --diagnostics " + d + "/diagnostics.json --json-out " + d +
        "/attribution.json > /dev/null 2>&1 && " + bin + " report --draws " + d + "/draws.csv --attribution " + d +
        "/attribution.json --out-dir " + d + "/plots > /dev/null 2>&1";
    const int code = shell(cmd);
    if (code != 0) return report(8, false, std::string("pipeline ") + run + " exited " + std::to_string(code));
  }
  std::vector<fs::path> files{"draws.csv", "attribution.json"};
  std::set<fs::path> svgs_a, svgs_b;
  for (const auto& e : fs::directory_iterator(root / "a" / "plots")) svgs_a.insert(e.path().filename());
  for (const auto& e : fs::directory_iterator(root / "b" / "plots")) svgs_b.insert(e.path().filename());
  for (const fs::path& s : svgs_a) files.push_back(fs::path("plots") / s);
  std::size_t differing = 0;
  for (const fs::path& f : files) {
    if (slurp(root / "a" / f) != slurp(root / "b" / f) || slurp(root / "a" / f).empty()) {
      std::cout << "  differs: " << f.string() << "\n";
      ++differing;
    }
  }
  const bool pass = differing == 0 && svgs_a == svgs_b && !svgs_a.empty();
  return report(8, pass,
                std::to_string(files.size()) + " files compared (" + std::to_string(svgs_a.size()) + " SVGs), " +
                    std::to_string(differing) + " differ");
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty()) which = {1, 2, 3, 4, 5, 6, 7, 8};
  bool all = true;
  for (int n : which) {
    bool pass = false;
    try {
      switch (n) {
        case 1: pass = criterion1(); break;
        case 2: pass = criterion2(); break;
        case 3: pass = criterion3(); break;
        case 4: pass = criterion4(); break;
        case 5: pass = criterion5(); break;
        case 6: pass = criterion6(); break;
        case 7: pass = criterion7(); break;
        case 8: pass = criterion8(); break;
        default:
          std::cerr << "unknown criterion " << n << "\n";
          return 2;
      }
    } catch (const std::exception& e) {
      pass = report(n, false, std::string("exception: ") + e.what());
    }
    all = all && pass;
  }
  return all ? 0 : 1;
}
