#include "mta/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "mta/errors.hpp"

namespace mta {

using nlohmann::json;

namespace {

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v, int precision = 4) {
  if (std::isnan(v)) return "-";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

json number_or_tag(double v, const char* nan_tag) {
  if (std::isnan(v)) return nan_tag;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

}  // namespace

void write_draws_csv(std::ostream& out, const PosteriorDraws& draws) {
  out << "chain,iter";
  for (const std::string& name : draws.names) out << ',' << name;
  out << '\n';
  for (std::size_t c = 0; c < draws.n_chains; ++c) {
    for (std::size_t i = 0; i < draws.n_samples; ++i) {
      out << c << ',' << i;
      for (double v : draws.draw(c, i)) out << ',' << format_exact(v);
      out << '\n';
    }
  }
}

void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& draws) {
  auto out = open_out(path);
  write_draws_csv(out, draws);
}

PosteriorDraws read_draws_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "header", "empty draws file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> header = split_csv(line);
  if (header.size() < 3 || header[0] != "chain" || header[1] != "iter") {
    throw ParseError(source, 1, "header", "expected 'chain,iter,<params...>'");
  }
  PosteriorDraws draws;
  draws.names.assign(header.begin() + 2, header.end());

  std::size_t line_no = 1;
  std::size_t current_chain = 0;
  std::size_t rows_in_chain = 0;
  bool any = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw ParseError(source, line_no, "", "expected " + std::to_string(header.size()) +
                                                " fields, found " + std::to_string(fields.size()));
    }
    char* end = nullptr;
    const unsigned long long chain = std::strtoull(fields[0].c_str(), &end, 10);
    if (*end != '\0' || fields[0].empty()) throw ParseError(source, line_no, "chain", "not an integer");
    const unsigned long long iter = std::strtoull(fields[1].c_str(), &end, 10);
    if (*end != '\0' || fields[1].empty()) throw ParseError(source, line_no, "iter", "not an integer");

    if (!any) {
      if (chain != 0) throw ParseError(source, line_no, "chain", "chains must start at 0");
      any = true;
    } else if (chain == current_chain + 1) {
      if (draws.n_chains == 0) draws.n_samples = rows_in_chain;
      if (rows_in_chain != draws.n_samples) {
        throw ParseError(source, line_no, "chain", "chains have different lengths");
      }
      ++draws.n_chains;
      current_chain = chain;
      rows_in_chain = 0;
    } else if (chain != current_chain) {
      throw ParseError(source, line_no, "chain", "rows must be grouped by chain in order");
    }
    if (iter != rows_in_chain) throw ParseError(source, line_no, "iter", "iterations out of order");
    ++rows_in_chain;

    for (std::size_t k = 2; k < fields.size(); ++k) {
      const double v = std::strtod(fields[k].c_str(), &end);
      if (*end != '\0' || fields[k].empty()) {
        throw ParseError(source, line_no, header[k], "not a number");
      }
      draws.values.push_back(v);
    }
  }
  if (!any) throw ParseError(source, line_no, "", "draws file has no rows");
  if (draws.n_chains == 0) draws.n_samples = rows_in_chain;
  if (rows_in_chain != draws.n_samples) {
    throw ParseError(source, line_no, "chain", "chains have different lengths");
  }
  ++draws.n_chains;
  draws.chains.resize(draws.n_chains);
  return draws;
}

PosteriorDraws read_draws_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  return read_draws_csv(in, path.string());
}

void write_diagnostics_json(const std::filesystem::path& path, const FitRecord& record,
                            const PosteriorDraws& draws, const Diagnostics& diag,
                            const std::vector<ParameterSummary>& summary) {
  json doc;
  doc["model"] = {{"link", to_string(record.spec.link)},
                  {"n_channels", record.spec.n_channels},
                  {"channels", record.channel_names},
                  {"random_effects", record.spec.include_random_effects},
                  {"interaction", record.spec.include_interaction},
                  {"n_journeys", record.n_journeys}};
  doc["priors"] = {{"sigma_b_rate", record.priors.sigma_b_rate},
                   {"beta_scale", record.priors.beta_scale},
                   {"gamma_sd", record.priors.gamma_sd},
                   {"mu_sd", record.priors.mu_sd},
                   {"sigma_y_scale", record.priors.sigma_y_scale}};
  const SamplerConfig& s = record.sampler;
  doc["sampler"] = {{"kernel", s.kernel == Kernel::hmc ? "hmc" : "random-walk"},
                    {"chains", s.n_chains},
                    {"warmup", s.n_warmup},
                    {"samples", s.n_samples},
                    {"target_accept", s.target_accept},
                    {"max_leapfrog_steps", s.max_leapfrog_steps},
                    {"seed", s.seed},
                    {"init_jitter", s.init_jitter},
                    {"trajectory_length", s.trajectory_length},
                    {"init_candidates", s.init_candidates},
                    {"init_optimizer_iterations", s.init_optimizer_iterations}};
  json chains = json::array();
  for (const ChainStats& c : draws.chains) {
    chains.push_back({{"accept_rate", c.accept_rate},
                      {"divergences", c.divergences},
                      {"step_size", c.step_size},
                      {"leapfrog_steps", c.leapfrog_steps},
                      {"inverse_mass", c.inverse_mass}});
  }
  doc["chains"] = std::move(chains);
  json params = json::array();
  // Diagnostics need two chains; without them the fields read "unavailable".
  const bool have_diag = diag.names.size() == summary.size();
  for (std::size_t p = 0; p < summary.size(); ++p) {
    const ParameterSummary& sum = summary[p];
    json entry = {{"name", sum.name}};
    if (have_diag) {
      entry["rhat"] = diag.degenerate[p] ? json("degenerate") : number_or_tag(diag.rhat[p], "unavailable");
      entry["ess_bulk"] = number_or_tag(diag.ess_bulk[p], diag.degenerate[p] ? "degenerate" : "unavailable");
      entry["ess_tail"] = number_or_tag(diag.ess_tail[p], diag.degenerate[p] ? "degenerate" : "unavailable");
    } else {
      entry["rhat"] = entry["ess_bulk"] = entry["ess_tail"] = "unavailable";
    }
    entry.update(json{{"mean", sum.mean},
                  {"sd", sum.sd},
                  {"q2.5", sum.q025},
                  {"q25", sum.q25},
                  {"q50", sum.q50},
                  {"q75", sum.q75},
                  {"q97.5", sum.q975},
                  {"width95", sum.width95}});
    if (sum.half_life) {
      entry["half_life"] = {{"mean", number_or_tag(sum.half_life->mean, "nan")},
                            {"median", number_or_tag(sum.half_life->median, "nan")},
                            {"q2.5", number_or_tag(sum.half_life->q025, "nan")},
                            {"q97.5", number_or_tag(sum.half_life->q975, "nan")}};
    }
    params.push_back(std::move(entry));
  }
  doc["parameters"] = std::move(params);
  doc["max_rhat"] = have_diag ? number_or_tag(diag.max_rhat(), "degenerate") : json("unavailable");
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

FitRecord read_fit_record(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  try {
    const json doc = json::parse(in);
    const json& m = doc.at("model");
    FitRecord r;
    r.spec.link = link_from_string(m.at("link").get<std::string>());
    r.spec.n_channels = m.at("n_channels").get<std::size_t>();
    r.spec.include_random_effects = m.at("random_effects").get<bool>();
    r.spec.include_interaction = m.at("interaction").get<bool>();
    r.channel_names = m.at("channels").get<std::vector<std::string>>();
    r.n_journeys = m.at("n_journeys").get<std::size_t>();
    return r;
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 1, "model", e.what());
  }
}

void write_attribution_json(const std::filesystem::path& path, const AttributionReport& report) {
  json doc;
  doc["metadata"] = {{"n_journeys", report.n_journeys},
                     {"link", to_string(report.link)},
                     {"n_draws", report.n_draws}};
  json channels = json::array();
  for (const ChannelAttribution& c : report.channels) {
    channels.push_back({{"name", c.name},
                        {"mean", c.mean},
                        {"sd", c.sd},
                        {"q2.5", c.q025},
                        {"q97.5", c.q975},
                        {"draws", c.draws}});
  }
  doc["channels"] = std::move(channels);
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

AttributionReport read_attribution_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  try {
    const json doc = json::parse(in);
    AttributionReport r;
    const json& meta = doc.at("metadata");
    r.n_journeys = meta.at("n_journeys").get<std::size_t>();
    r.link = link_from_string(meta.at("link").get<std::string>());
    r.n_draws = meta.at("n_draws").get<std::size_t>();
    for (const json& c : doc.at("channels")) {
      ChannelAttribution ch;
      ch.name = c.at("name").get<std::string>();
      ch.mean = c.at("mean").get<double>();
      ch.sd = c.at("sd").get<double>();
      ch.q025 = c.at("q2.5").get<double>();
      ch.q975 = c.at("q97.5").get<double>();
      ch.draws = c.at("draws").get<std::vector<double>>();
      r.channels.push_back(std::move(ch));
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 1, "", e.what());
  }
}

void write_attribution_csv(const std::filesystem::path& path, const AttributionReport& report) {
  auto out = open_out(path);
  out << "draw";
  for (const ChannelAttribution& c : report.channels) out << ',' << c.name;
  out << '\n';
  for (std::size_t d = 0; d < report.n_draws; ++d) {
    out << d;
    for (const ChannelAttribution& c : report.channels) out << ',' << format_exact(c.draws[d]);
    out << '\n';
  }
}

void print_summary_table(std::ostream& out, const std::vector<ParameterSummary>& summary,
                         const Diagnostics* diag) {
  std::size_t width = 9;
  for (const auto& s : summary) width = std::max(width, s.name.size() + 1);
  out << std::left << std::setw(static_cast<int>(width)) << "parameter" << std::right;
  for (const char* h : {"mean", "sd", "2.5%", "25%", "50%", "75%", "97.5%", "width95"}) {
    out << std::setw(11) << h;
  }
  if (diag) out << std::setw(9) << "rhat" << std::setw(9) << "ess_bulk" << std::setw(9) << "ess_tail";
  out << '\n';
  for (std::size_t p = 0; p < summary.size(); ++p) {
    const ParameterSummary& s = summary[p];
    out << std::left << std::setw(static_cast<int>(width)) << s.name << std::right;
    for (double v : {s.mean, s.sd, s.q025, s.q25, s.q50, s.q75, s.q975, s.width95}) {
      out << std::setw(11) << format_short(v);
    }
    if (diag) {
      out << std::setw(9) << (diag->degenerate[p] ? "degen" : format_short(diag->rhat[p]))
          << std::setw(9) << format_short(diag->ess_bulk[p], 5)
          << std::setw(9) << format_short(diag->ess_tail[p], 5);
    }
    if (s.half_life) out << "  half-life " << format_short(s.half_life->median) << " d";
    out << '\n';
  }
}

void print_attribution_table(std::ostream& out, const AttributionReport& report) {
  std::size_t width = 8;
  for (const auto& c : report.channels) width = std::max(width, c.name.size() + 1);
  out << std::left << std::setw(static_cast<int>(width)) << "channel" << std::right
      << std::setw(12) << "mean" << std::setw(12) << "sd" << std::setw(12) << "2.5%"
      << std::setw(12) << "97.5%" << '\n';
  for (const auto& c : report.channels) {
    out << std::left << std::setw(static_cast<int>(width)) << c.name << std::right
        << std::setw(12) << format_short(c.mean, 5) << std::setw(12) << format_short(c.sd, 5)
        << std::setw(12) << format_short(c.q025, 5) << std::setw(12) << format_short(c.q975, 5)
        << '\n';
  }
  out << report.n_journeys << " journeys, " << report.n_draws << " draws, "
      << to_string(report.link) << " link\n";
}

}  // namespace mta
