#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mta/model.hpp"
#include "mta/simulator.hpp"

namespace mta {

/// Newline-delimited JSON journey file.
///
/// Line 1 is the manifest:
///   {"manifest": {"channels": ["email", "display"], "time_unit": "days"}}
/// Every further non-blank line is one journey:
///   {"customer_id": "c0", "outcome": 1, "eval_time": 3.5,
///    "touches": [{"channel": "email", "time": 0.0}, ...]}
/// eval_time is optional and defaults to the last touch time. Channel ids are
/// the positions in the manifest's channel list.
struct JourneyFile {
  std::vector<std::string> channels;
  std::vector<Journey> journeys;
};

JourneyFile parse_journeys(std::istream& in, const std::string& source = "<stream>");
JourneyFile parse_journey_file(const std::filesystem::path& path);

void write_journeys(std::ostream& out, const JourneyFile& file);
void write_journey_file(const std::filesystem::path& path, const JourneyFile& file);

/// Default channel names ch0, ch1, ...
std::vector<std::string> default_channel_names(std::size_t n_channels);

/// Ground-truth sidecar written next to simulated data.
void write_truth_file(const std::filesystem::path& path, const SimConfig& config,
                      const SimulatedData& data);
ModelParams read_truth_params(const std::filesystem::path& path);

}  // namespace mta
