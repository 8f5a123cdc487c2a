#include <filesystem>
#include <sstream>

#include "doctest.h"

#include "mta/errors.hpp"
#include "mta/journey_io.hpp"
#include "mta/simulator.hpp"

using namespace mta;

namespace {

const char* kManifest = R"({"manifest": {"channels": ["email", "display"], "time_unit": "days"}})";

JourneyFile parse_text(const std::string& text) {
  std::istringstream in(text);
  return parse_journeys(in, "mem");
}

ParseError parse_failure(const std::string& text) {
  try {
    parse_text(text);
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("", 0, "", "");
}

}  // namespace

TEST_CASE("manifest only gives an empty dataset") {
  const JourneyFile f = parse_text(std::string(kManifest) + "\n");
  CHECK(f.journeys.empty());
  CHECK(f.channels == std::vector<std::string>{"email", "display"});
}

TEST_CASE("records map channels to manifest order") {
  const JourneyFile f = parse_text(std::string(kManifest) + "\n\n" +
      R"({"customer_id": "a", "outcome": 1, "touches": [{"channel": "display", "time": 0}, {"channel": "email", "time": 2.5}]})" "\n"
      R"({"customer_id": "b", "outcome": 0, "eval_time": 4, "touches": [{"channel": "email", "time": 1}]})" "\n");
  REQUIRE(f.journeys.size() == 2);
  CHECK(f.journeys[0].touches[0].channel == 1);
  CHECK(f.journeys[0].touches[1].channel == 0);
  CHECK(f.journeys[0].eval_time == 2.5);
  CHECK(f.journeys[1].eval_time == 4.0);
  CHECK(f.journeys[1].customer_id == "b");
}

TEST_CASE("negative time names the offending line") {
  const ParseError e = parse_failure(std::string(kManifest) + "\n" +
      R"({"customer_id": "a", "outcome": 1, "touches": [{"channel": "email", "time": 0}]})" "\n"
      R"({"customer_id": "b", "outcome": 1, "touches": [{"channel": "email", "time": -1}]})" "\n");
  CHECK(e.line() == 3);
  CHECK(e.field() == "time");
  CHECK(std::string(e.what()).find("mem:3") != std::string::npos);
}

TEST_CASE("unknown channel is named") {
  const ParseError e = parse_failure(std::string(kManifest) + "\n" +
      R"({"customer_id": "a", "outcome": 1, "touches": [{"channel": "radio", "time": 0}]})");
  CHECK(e.line() == 2);
  CHECK(e.field() == "channel");
  CHECK(std::string(e.what()).find("radio") != std::string::npos);
}

TEST_CASE("malformed input is rejected with a line number") {
  CHECK(parse_failure("").field() == "manifest");
  CHECK(parse_failure(R"({"customer_id": "a", "outcome": 1, "touches": []})").field() == "manifest");
  CHECK(parse_failure(std::string(kManifest) + "\n{not json").line() == 2);
  CHECK(parse_failure(std::string(kManifest) + "\n" + R"({"customer_id": "a", "touches": [{"channel": "email", "time": 0}]})").field() == "outcome");
  CHECK(parse_failure(std::string(kManifest) + "\n" + R"({"customer_id": "a", "outcome": 1, "touches": [{"channel": "email", "time": 2}, {"channel": "email", "time": 1}]})").field() == "time");
  CHECK(parse_failure(std::string(kManifest) + "\n" + R"({"customer_id": "a", "outcome": 1, "eval_time": 0.5, "touches": [{"channel": "email", "time": 1}]})").field() == "eval_time");
  CHECK(parse_failure(R"({"manifest": {"channels": ["a", "a"], "time_unit": "days"}})").field() == "channels");
  CHECK(parse_failure(R"({"manifest": {"channels": ["a"], "time_unit": "hours"}})").field() == "time_unit");
}

TEST_CASE("round trip: simulate, write, parse gives the identical dataset") {
  SimConfig config;
  config.n_journeys = 250;
  config.n_channels = 3;
  config.touches_per_journey = 4;
  const SimulatedData data = simulate_dataset(config);
  JourneyFile file{default_channel_names(3), data.journeys};
  const auto path = std::filesystem::temp_directory_path() / "mta_test_roundtrip.ndjson";
  write_journey_file(path, file);
  const JourneyFile back = parse_journey_file(path);
  CHECK(back.channels == file.channels);
  CHECK(back.journeys == file.journeys);

  const auto truth = std::filesystem::temp_directory_path() / "mta_test_roundtrip.truth.json";
  write_truth_file(truth, config, data);
  CHECK(read_truth_params(truth) == data.truth);
  std::filesystem::remove(path);
  std::filesystem::remove(truth);
}

TEST_CASE("missing file is a parse error") {
  CHECK_THROWS_AS(parse_journey_file("/nonexistent/mta/file.ndjson"), ParseError);
}
