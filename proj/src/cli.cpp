#include "mta/cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"

#include "mta/attribution.hpp"
#include "mta/diagnostics.hpp"
#include "mta/errors.hpp"
#include "mta/fit.hpp"
#include "mta/gradient_check.hpp"
#include "mta/journey_io.hpp"
#include "mta/preprocess.hpp"
#include "mta/report_io.hpp"
#include "mta/simulator.hpp"
#include "mta/svg.hpp"

namespace mta {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// --config files use the journey-file syntax (JSON). Top-level keys set options
// of the main command; an object keyed by a subcommand name sets its options:
//   {"fit": {"chains": 2, "seed": 7}, "attribute": {"max-draws": 200}}
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = to_json(app, default_also);
    return j.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw CLI::ConversionError("config", e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config", "top level must be an object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("config", "unsupported value " + v.dump());
  }

  static void flatten(const json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        std::vector<std::string> next = parents;
        next.push_back(key);
        flatten(value, next, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const json& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }

  static json to_json(const CLI::App* app, bool default_also) {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string& name = opt->get_lnames().front();
      if (opt->count() > 0) {
        const auto& results = opt->results();
        if (results.size() == 1) j[name] = results.front();
        else j[name] = results;
      } else if (default_also && !opt->get_default_str().empty()) {
        j[name] = opt->get_default_str();
      }
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      json child = to_json(sub, default_also);
      if (!child.empty()) j[sub->get_name()] = child;
    }
    return j;
  }
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("ATTR_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput(std::string("ATTR_SEED is not an unsigned integer: ") + env);
  }
  return 1;
}

std::string file_stem_for(const std::string& name) {
  std::string out;
  for (char ch : name) {
    out += std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' ? ch : '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "unnamed" : out;
}

bool is_random_effect(const std::string& name) { return name.rfind("b[", 0) == 0; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

const std::map<std::string, Link> kLinks{{"identity", Link::identity}, {"logit", Link::logit}};
const std::map<std::string, Kernel> kKernels{{"hmc", Kernel::hmc},
                                             {"random-walk", Kernel::random_walk}};

struct SimulateArgs {
  SimConfig config;
  std::string out;
  std::string truth;
  std::vector<std::string> channel_names;
  std::optional<double> mu;
  std::optional<double> gamma;
  std::vector<double> beta;
  std::vector<double> lambda;
};

struct FitArgs {
  std::string data;
  std::string draws_out = "draws.csv";
  std::string diagnostics_out = "diagnostics.json";
  std::string preprocessed_out;
  Link link = Link::logit;
  bool random_effects = false;
  bool no_interaction = false;
  bool allow_nonconverged = false;
  bool preprocess = false;
  std::optional<std::size_t> max_customers;
  PreprocessConfig pre;
  PriorConfig priors;
  SamplerConfig sampler;
};

struct AttributeArgs {
  std::string data;
  std::string draws;
  std::string diagnostics;
  std::string json_out = "attribution.json";
  std::string csv_out;
  bool no_interaction = false;
  std::size_t max_draws = 500;
  std::size_t threads = 0;
};

struct ReportArgs {
  std::string draws;
  std::string attribution;
  std::string out_dir = ".";
  std::size_t bins = 30;
  bool include_random_effects = false;
};

int run_simulate(SimulateArgs& a, std::ostream& out) {
  SimConfig& config = a.config;
  if (a.mu || a.gamma || !a.beta.empty() || !a.lambda.empty()) {
    validate_sim_config(config);
    Rng rng(config.seed, 0);
    ModelParams p = sample_true_params(config, rng);
    if (a.mu) p.mu = *a.mu;
    if (a.gamma) p.gamma = *a.gamma;
    if (!a.beta.empty()) p.beta = a.beta;
    if (!a.lambda.empty()) p.lambda = a.lambda;
    config.param_overrides = p;
  }
  const SimulatedData data = simulate_dataset(config);

  JourneyFile file;
  file.channels = a.channel_names.empty() ? default_channel_names(config.n_channels) : a.channel_names;
  if (file.channels.size() != config.n_channels) {
    throw InvalidInput("--channel-names lists " + std::to_string(file.channels.size()) +
                       " names for " + std::to_string(config.n_channels) + " channels");
  }
  file.journeys = data.journeys;
  write_journey_file(a.out, file);
  const fs::path truth = a.truth.empty() ? fs::path(a.out).replace_extension(".truth.json")
                                         : fs::path(a.truth);
  write_truth_file(truth, config, data);
  out << "wrote " << data.journeys.size() << " journeys to " << a.out << "\n";
  out << "wrote ground truth to " << truth.string() << "\n";
  return kExitOk;
}

int run_fit(FitArgs& a, std::ostream& out, std::ostream& err) {
  JourneyFile file = parse_journey_file(a.data);
  std::vector<Journey> dataset = std::move(file.journeys);
  if (a.preprocess) {
    a.pre.max_customers = a.max_customers;
    const std::size_t before = dataset.size();
    dataset = preprocess(dataset, a.pre);
    out << "preprocess kept " << dataset.size() << " of " << before << " journeys\n";
    if (!a.preprocessed_out.empty()) {
      write_journey_file(a.preprocessed_out, JourneyFile{file.channels, dataset});
    }
  }
  if (dataset.empty()) throw EmptyDataset("no journeys in " + a.data);

  FitRecord record;
  record.spec.n_channels = file.channels.size();
  record.spec.link = a.link;
  record.spec.include_random_effects = a.random_effects;
  record.spec.include_interaction = !a.no_interaction;
  record.channel_names = file.channels;
  record.n_journeys = dataset.size();
  record.priors = a.priors;
  record.sampler = a.sampler;

  const PosteriorDraws draws = fit_model(dataset, a.priors, record.spec, a.sampler);
  const std::vector<ParameterSummary> summary = summarize(draws);
  std::optional<Diagnostics> diag;
  if (draws.n_chains >= 2) diag = diagnostics(draws);

  write_draws_csv(a.draws_out, draws);
  write_diagnostics_json(a.diagnostics_out, record, draws, diag ? *diag : Diagnostics{}, summary);

  std::vector<ParameterSummary> shown;
  for (const ParameterSummary& s : summary) {
    if (!is_random_effect(s.name)) shown.push_back(s);
  }
  Diagnostics shown_diag;
  if (diag) {
    for (std::size_t k = 0; k < diag->names.size(); ++k) {
      if (is_random_effect(diag->names[k])) continue;
      shown_diag.names.push_back(diag->names[k]);
      shown_diag.rhat.push_back(diag->rhat[k]);
      shown_diag.ess_bulk.push_back(diag->ess_bulk[k]);
      shown_diag.ess_tail.push_back(diag->ess_tail[k]);
      shown_diag.degenerate.push_back(diag->degenerate[k]);
    }
  }
  print_summary_table(out, shown, diag ? &shown_diag : nullptr);
  if (shown.size() < summary.size()) {
    out << "(" << summary.size() - shown.size() << " random-effect rows in " << a.draws_out
        << ")\n";
  }
  std::size_t divergences = 0;
  for (const ChainStats& c : draws.chains) divergences += c.divergences;
  if (divergences > 0) err << "warning: " << divergences << " divergent transitions\n";

  if (!diag) {
    err << "warning: one chain, convergence not checked\n";
    return kExitOk;
  }
  const double worst = diag->max_rhat();
  if (worst > 1.05) {
    err << "R-hat " << worst << " exceeds 1.05";
    if (a.allow_nonconverged) {
      err << " (allowed)\n";
      return kExitOk;
    }
    err << "; rerun with more iterations or pass --allow-nonconverged\n";
    return kExitNumeric;
  }
  return kExitOk;
}

int run_attribute(const AttributeArgs& a, std::ostream& out) {
  const JourneyFile file = parse_journey_file(a.data);
  const PosteriorDraws draws = read_draws_csv(fs::path(a.draws));
  ModelSpec spec;
  if (!a.diagnostics.empty()) {
    spec = read_fit_record(a.diagnostics).spec;
  } else {
    spec = spec_from_names(draws.names, !a.no_interaction);
  }
  if (spec.n_channels != file.channels.size()) {
    throw InvalidInput("draws describe " + std::to_string(spec.n_channels) +
                       " channels but the manifest lists " + std::to_string(file.channels.size()));
  }
  AttributionOptions options;
  options.max_draws = a.max_draws;
  options.channel_names = file.channels;
  options.n_threads = a.threads;
  const AttributionReport report = attribute(file.journeys, draws, spec, options);
  if (!a.json_out.empty()) write_attribution_json(a.json_out, report);
  if (!a.csv_out.empty()) write_attribution_csv(a.csv_out, report);
  print_attribution_table(out, report);
  return kExitOk;
}

int run_report(const ReportArgs& a, std::ostream& out) {
  if (a.draws.empty() && a.attribution.empty()) {
    throw InvalidInput("report needs --draws and/or --attribution");
  }
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  std::size_t plots = 0;
  if (!a.draws.empty()) {
    const PosteriorDraws draws = read_draws_csv(fs::path(a.draws));
    std::vector<ParameterSummary> summary;
    std::vector<std::size_t> columns;
    for (std::size_t k = 0; k < draws.n_params(); ++k) {
      if (!a.include_random_effects && is_random_effect(draws.names[k])) continue;
      columns.push_back(k);
    }
    std::optional<Diagnostics> diag;
    if (draws.n_chains >= 2) diag = diagnostics(draws);
    Diagnostics shown_diag;
    for (std::size_t k : columns) {
      const std::vector<double> values = draws.column(k);
      summary.push_back(summarize_values(draws.names[k], values));
      if (diag) {
        shown_diag.names.push_back(diag->names[k]);
        shown_diag.rhat.push_back(diag->rhat[k]);
        shown_diag.ess_bulk.push_back(diag->ess_bulk[k]);
        shown_diag.ess_tail.push_back(diag->ess_tail[k]);
        shown_diag.degenerate.push_back(diag->degenerate[k]);
      }
      write_text(dir / (file_stem_for(draws.names[k]) + ".svg"),
                 render_density_svg(values, draws.names[k], a.bins));
      ++plots;
    }
    print_summary_table(out, summary, diag ? &shown_diag : nullptr);
  }
  if (!a.attribution.empty()) {
    const AttributionReport report = read_attribution_json(a.attribution);
    print_attribution_table(out, report);
    for (const ChannelAttribution& c : report.channels) {
      write_text(dir / ("attribution_" + file_stem_for(c.name) + ".svg"),
                 render_density_svg(c.draws, "attribution " + c.name, a.bins));
      ++plots;
    }
  }
  out << "wrote " << plots << " plots to " << dir.string() << "\n";
  return kExitOk;
}

int run_check_gradients(const GradientCheckConfig& config, std::ostream& out, std::ostream& err) {
  const GradientCheckResult result = check_gradients(config);
  out << "points " << result.points_checked << ", coordinates " << result.coordinates_checked
      << "\n";
  out << "max relative error " << result.max_relative_error
      << ", max absolute error near zero " << result.max_absolute_error_small << "\n";
  const std::size_t shown = std::min<std::size_t>(result.failures.size(), 20);
  for (std::size_t k = 0; k < shown; ++k) {
    const GradientCheckFailure& f = result.failures[k];
    err << "mismatch " << f.link << " point " << f.point << " " << f.parameter << ": analytic "
        << f.analytic << " numeric " << f.numeric << "\n";
  }
  if (!result.passed()) {
    err << result.failures.size() << " coordinates failed\n";
    return kExitNumeric;
  }
  out << "gradient check passed\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian multi-touch attribution: simulate, fit, attribute, report", "mta"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON file of option values, nested by subcommand");
  app.require_subcommand(1);
  app.fallthrough(false);

  std::uint64_t seed_default = 1;
  try {
    seed_default = default_seed();
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  // simulate
  SimulateArgs sim;
  sim.config.seed = seed_default;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic journey file and its ground truth");
  simulate->add_option("--journeys", sim.config.n_journeys, "Number of journeys")
      ->capture_default_str();
  simulate->add_option("--channels", sim.config.n_channels, "Number of channels")
      ->capture_default_str();
  simulate->add_option("--touches", sim.config.touches_per_journey, "Touches per journey")
      ->capture_default_str();
  simulate->add_option("--rate", sim.config.inter_event_rate, "Rate of exponential gaps between touches")
      ->capture_default_str();
  simulate->add_option("--link", sim.config.link, "Outcome link")
      ->transform(CLI::CheckedTransformer(kLinks, CLI::ignore_case))
      ->default_str("identity");
  simulate->add_option("--seed", sim.config.seed, "RNG seed (default from ATTR_SEED)")
      ->capture_default_str();
  simulate->add_option("--sigma-y", sim.config.sigma_y, "Outcome noise sd (identity link)")
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "Journey file to write")->required();
  simulate->add_option("--truth", sim.truth, "Ground-truth JSON (default <out>.truth.json)");
  simulate->add_option("--channel-names", sim.channel_names, "Channel names for the manifest")
      ->delimiter(',');
  simulate->add_option("--mu", sim.mu, "Fix the true intercept");
  simulate->add_option("--gamma", sim.gamma, "Fix the true interaction coefficient");
  simulate->add_option("--beta", sim.beta, "Fix the true channel effects")->delimiter(',');
  simulate->add_option("--lambda", sim.lambda, "Fix the true decay rates")->delimiter(',');

  // fit
  FitArgs fit;
  fit.sampler.seed = seed_default;
  auto* fit_cmd = app.add_subcommand("fit", "Sample the posterior for a journey file");
  fit_cmd->add_option("--data", fit.data, "Journey file")->required();
  fit_cmd->add_option("--draws-out", fit.draws_out, "Draws CSV to write")->capture_default_str();
  fit_cmd->add_option("--diagnostics-out", fit.diagnostics_out, "Diagnostics JSON to write")
      ->capture_default_str();
  fit_cmd->add_option("--link", fit.link, "Outcome link")
      ->transform(CLI::CheckedTransformer(kLinks, CLI::ignore_case))
      ->default_str("logit");
  fit_cmd->add_flag("--random-effects", fit.random_effects, "Per-customer random intercepts");
  fit_cmd->add_flag("--no-interaction", fit.no_interaction, "Drop the pairwise interaction term");
  fit_cmd->add_option("--chains", fit.sampler.n_chains, "Number of chains")->capture_default_str();
  fit_cmd->add_option("--warmup", fit.sampler.n_warmup, "Warmup iterations per chain")
      ->capture_default_str();
  fit_cmd->add_option("--samples", fit.sampler.n_samples, "Retained draws per chain")
      ->capture_default_str();
  fit_cmd->add_option("--target-accept", fit.sampler.target_accept, "Step-size adaptation target")
      ->capture_default_str();
  fit_cmd->add_option("--max-leapfrog", fit.sampler.max_leapfrog_steps, "Leapfrog step cap")
      ->capture_default_str();
  fit_cmd->add_option("--seed", fit.sampler.seed, "RNG seed (default from ATTR_SEED)")
      ->capture_default_str();
  fit_cmd->add_option("--init-jitter", fit.sampler.init_jitter, "Initial values drawn from U(-j, j)")
      ->capture_default_str();
  fit_cmd->add_option("--init-candidates", fit.sampler.init_candidates,
                      "Starting points tried per chain")
      ->capture_default_str();
  fit_cmd->add_option("--init-optimizer-iterations", fit.sampler.init_optimizer_iterations,
                      "L-BFGS iterations refining each starting point (0 = off)")
      ->capture_default_str();
  fit_cmd->add_option("--trajectory-length", fit.sampler.trajectory_length,
                      "Mean HMC integration time")
      ->capture_default_str();
  fit_cmd->add_option("--kernel", fit.sampler.kernel, "Transition kernel")
      ->transform(CLI::CheckedTransformer(kKernels, CLI::ignore_case))
      ->default_str("hmc");
  fit_cmd->add_option("--threads", fit.sampler.n_threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  fit_cmd->add_option("--sigma-b-rate", fit.priors.sigma_b_rate, "Exponential rate of sigma_b prior")
      ->capture_default_str();
  fit_cmd->add_option("--beta-scale", fit.priors.beta_scale, "Exponential scale of beta prior")
      ->capture_default_str();
  fit_cmd->add_option("--gamma-sd", fit.priors.gamma_sd, "Normal sd of gamma prior")
      ->capture_default_str();
  fit_cmd->add_option("--mu-sd", fit.priors.mu_sd, "Normal sd of mu prior")->capture_default_str();
  fit_cmd->add_option("--sigma-y-scale", fit.priors.sigma_y_scale, "Half-normal scale of sigma_y prior")
      ->capture_default_str();
  fit_cmd->add_flag("--allow-nonconverged", fit.allow_nonconverged,
                    "Exit 0 even if some R-hat exceeds 1.05");
  fit_cmd->add_flag("--preprocess", fit.preprocess, "Filter long journeys and balance outcomes first");
  fit_cmd->add_option("--max-touches", fit.pre.max_touches, "Preprocess: drop longer journeys")
      ->capture_default_str();
  fit_cmd->add_option("--target-positive-ratio", fit.pre.target_positive_ratio,
                      "Preprocess: minimum share of converting journeys")
      ->capture_default_str();
  fit_cmd->add_option("--subsample-seed", fit.pre.subsample_seed, "Preprocess: subsampling seed")
      ->capture_default_str();
  fit_cmd->add_option("--max-customers", fit.max_customers, "Preprocess: cap on journeys kept");
  fit_cmd->add_option("--preprocessed-out", fit.preprocessed_out,
                      "Write the preprocessed journey file here");

  // attribute
  AttributeArgs attr;
  auto* attribute_cmd = app.add_subcommand("attribute", "Removal-effect attribution per channel");
  attribute_cmd->add_option("--data", attr.data, "Journey file")->required();
  attribute_cmd->add_option("--draws", attr.draws, "Draws CSV from fit")->required();
  attribute_cmd->add_option("--diagnostics", attr.diagnostics,
                            "Diagnostics JSON from fit (supplies the model settings)");
  attribute_cmd->add_flag("--no-interaction", attr.no_interaction,
                          "Without --diagnostics: the fit had no interaction term");
  attribute_cmd->add_option("--json-out", attr.json_out, "Attribution JSON to write")
      ->capture_default_str();
  attribute_cmd->add_option("--csv-out", attr.csv_out, "Attribution CSV to write");
  attribute_cmd->add_option("--max-draws", attr.max_draws, "Thin posterior draws to at most this many")
      ->capture_default_str();
  attribute_cmd->add_option("--threads", attr.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();

  // report
  ReportArgs rep;
  auto* report_cmd = app.add_subcommand("report", "Summary tables and SVG density plots");
  report_cmd->add_option("--draws", rep.draws, "Draws CSV from fit");
  report_cmd->add_option("--attribution", rep.attribution, "Attribution JSON from attribute");
  report_cmd->add_option("--out-dir", rep.out_dir, "Directory for SVG files")->capture_default_str();
  report_cmd->add_option("--bins", rep.bins, "Histogram bins")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  report_cmd->add_flag("--include-random-effects", rep.include_random_effects,
                       "Also plot per-customer effects");

  // check-gradients
  GradientCheckConfig grad;
  grad.seed = seed_default;
  auto* grad_cmd = app.add_subcommand("check-gradients",
                                      "Compare analytic gradients with finite differences");
  grad_cmd->add_option("--points", grad.points, "Random points per link")->capture_default_str();
  grad_cmd->add_option("--channels", grad.n_channels, "Channels")->capture_default_str();
  grad_cmd->add_option("--journeys", grad.n_journeys, "Journeys per dataset")->capture_default_str();
  grad_cmd->add_option("--seed", grad.seed, "RNG seed (default from ATTR_SEED)")
      ->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*simulate) return run_simulate(sim, out);
    if (*fit_cmd) return run_fit(fit, out, err);
    if (*attribute_cmd) return run_attribute(attr, out);
    if (*report_cmd) return run_report(rep, out);
    if (*grad_cmd) return run_check_gradients(grad, out, err);
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const InitializationError& e) {
    err << "initialization failed: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace mta
