#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mta/attribution.hpp"
#include "mta/diagnostics.hpp"
#include "mta/likelihood.hpp"
#include "mta/sampler.hpp"

namespace mta {

/// Draws CSV: header `chain,iter,<names...>`, one row per draw, values printed
/// with 17 significant digits so they parse back bit-exactly.
void write_draws_csv(std::ostream& out, const PosteriorDraws& draws);
void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws);
/// Chain statistics are not stored in the CSV and come back empty.
PosteriorDraws read_draws_csv(std::istream& in, const std::string& source = "<stream>");
PosteriorDraws read_draws_csv(const std::filesystem::path& path);

/// Everything `fit` records next to the draws.
struct FitRecord {
  ModelSpec spec;
  std::vector<std::string> channel_names;
  std::size_t n_journeys = 0;
  PriorConfig priors;
  SamplerConfig sampler;
};

void write_diagnostics_json(const std::filesystem::path& path, const FitRecord& record,
                            const PosteriorDraws& draws, const Diagnostics& diag,
                            const std::vector<ParameterSummary>& summary);
/// Reads back the model section of a diagnostics file.
FitRecord read_fit_record(const std::filesystem::path& path);

void write_attribution_json(const std::filesystem::path& path, const AttributionReport& report);
AttributionReport read_attribution_json(const std::filesystem::path& path);
/// Columns: draw,<channel names...>
void write_attribution_csv(const std::filesystem::path& path, const AttributionReport& report);

/// Fixed-width text table: name, mean, sd, quantiles, 95% width, R-hat, ESS.
/// `diag` may be null.
void print_summary_table(std::ostream& out, const std::vector<ParameterSummary>& summary,
                         const Diagnostics* diag);
void print_attribution_table(std::ostream& out, const AttributionReport& report);

}  // namespace mta
