#include "mta/journey_io.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "json.hpp"

#include "mta/errors.hpp"

namespace mta {

using nlohmann::json;

namespace {

const json& require(const json& object, const char* key, const std::string& source,
                    std::size_t line) {
  const auto it = object.find(key);
  if (it == object.end()) throw ParseError(source, line, key, "missing field");
  return *it;
}

double require_number(const json& object, const char* key, const std::string& source,
                      std::size_t line) {
  const json& v = require(object, key, source, line);
  if (!v.is_number()) throw ParseError(source, line, key, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(source, line, key, "value is not finite");
  return x;
}

}  // namespace

std::vector<std::string> default_channel_names(std::size_t n_channels) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < n_channels; ++c) names.push_back("ch" + std::to_string(c));
  return names;
}

JourneyFile parse_journeys(std::istream& in, const std::string& source) {
  JourneyFile file;
  std::map<std::string, ChannelId> channel_ids;
  bool have_manifest = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError(source, line, "", std::string("malformed record: ") + e.what());
    }
    if (!record.is_object()) throw ParseError(source, line, "", "record is not an object");

    if (!have_manifest) {
      const auto it = record.find("manifest");
      if (it == record.end() || !it->is_object()) {
        throw ParseError(source, line, "manifest", "first record must be the manifest");
      }
      const json& channels = require(*it, "channels", source, line);
      if (!channels.is_array() || channels.empty()) {
        throw ParseError(source, line, "channels", "expected a non-empty list of names");
      }
      for (const json& name : channels) {
        if (!name.is_string()) throw ParseError(source, line, "channels", "names must be strings");
        const auto key = name.get<std::string>();
        if (!channel_ids.emplace(key, file.channels.size()).second) {
          throw ParseError(source, line, "channels", "duplicate channel '" + key + "'");
        }
        file.channels.push_back(key);
      }
      const auto unit = it->find("time_unit");
      if (unit != it->end() && (!unit->is_string() || unit->get<std::string>() != "days")) {
        throw ParseError(source, line, "time_unit", "only \"days\" is supported");
      }
      have_manifest = true;
      continue;
    }

    Journey journey;
    const json& id = require(record, "customer_id", source, line);
    if (!id.is_string()) throw ParseError(source, line, "customer_id", "expected a string");
    journey.customer_id = id.get<std::string>();
    journey.outcome = require_number(record, "outcome", source, line);

    const json& touches = require(record, "touches", source, line);
    if (!touches.is_array() || touches.empty()) {
      throw ParseError(source, line, "touches", "expected a non-empty list");
    }
    double previous = 0.0;
    for (const json& t : touches) {
      if (!t.is_object()) throw ParseError(source, line, "touches", "touch is not an object");
      const json& channel = require(t, "channel", source, line);
      if (!channel.is_string()) throw ParseError(source, line, "channel", "expected a string");
      const auto found = channel_ids.find(channel.get<std::string>());
      if (found == channel_ids.end()) {
        throw ParseError(source, line, "channel",
                         "unknown channel '" + channel.get<std::string>() + "'");
      }
      const double time = require_number(t, "time", source, line);
      if (time < 0.0) throw ParseError(source, line, "time", "touch time is negative");
      if (time < previous) throw ParseError(source, line, "time", "touches are not sorted by time");
      previous = time;
      journey.touches.push_back({found->second, time});
    }
    journey.eval_time = journey.touches.back().time;
    if (record.contains("eval_time") && !record["eval_time"].is_null()) {
      journey.eval_time = require_number(record, "eval_time", source, line);
      if (journey.eval_time < journey.touches.back().time) {
        throw ParseError(source, line, "eval_time", "eval_time precedes the last touch");
      }
    }
    file.journeys.push_back(std::move(journey));
  }
  if (!have_manifest) throw ParseError(source, line == 0 ? 1 : line, "manifest", "file has no manifest");
  return file;
}

JourneyFile parse_journey_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  return parse_journeys(in, path.string());
}

void write_journeys(std::ostream& out, const JourneyFile& file) {
  json manifest = {{"manifest", {{"channels", file.channels}, {"time_unit", "days"}}}};
  out << manifest.dump() << '\n';
  for (const Journey& journey : file.journeys) {
    json touches = json::array();
    for (const Touch& t : journey.touches) {
      if (t.channel >= file.channels.size()) {
        throw InvalidInput("journey '" + journey.customer_id + "' uses an undeclared channel");
      }
      touches.push_back({{"channel", file.channels[t.channel]}, {"time", t.time}});
    }
    json record = {{"customer_id", journey.customer_id},
                   {"outcome", journey.outcome},
                   {"eval_time", journey.eval_time},
                   {"touches", std::move(touches)}};
    out << record.dump() << '\n';
  }
}

void write_journey_file(const std::filesystem::path& path, const JourneyFile& file) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_journeys(out, file);
}

void write_truth_file(const std::filesystem::path& path, const SimConfig& config,
                      const SimulatedData& data) {
  const ModelParams& p = data.truth;
  json doc;
  doc["config"] = {{"n_journeys", config.n_journeys},
                   {"n_channels", config.n_channels},
                   {"touches_per_journey", config.touches_per_journey},
                   {"inter_event_rate", config.inter_event_rate},
                   {"link", to_string(config.link)},
                   {"seed", config.seed},
                   {"sigma_y", config.sigma_y}};
  doc["params"] = {{"mu", p.mu},         {"gamma", p.gamma},     {"beta", p.beta},
                   {"lambda", p.lambda}, {"sigma_b", p.sigma_b}, {"sigma_y", p.sigma_y},
                   {"b", p.b}};
  std::vector<double> half_lives;
  for (double lam : p.lambda) half_lives.push_back(half_life(lam));
  doc["half_life_days"] = half_lives;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

ModelParams read_truth_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
  json doc;
  try {
    doc = json::parse(in);
    const json& p = doc.at("params");
    ModelParams out;
    out.mu = p.at("mu").get<double>();
    out.gamma = p.at("gamma").get<double>();
    out.beta = p.at("beta").get<std::vector<double>>();
    out.lambda = p.at("lambda").get<std::vector<double>>();
    out.sigma_b = p.at("sigma_b").get<double>();
    out.sigma_y = p.at("sigma_y").get<double>();
    out.b = p.at("b").get<std::vector<double>>();
    return out;
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 1, "params", e.what());
  }
}

}  // namespace mta
