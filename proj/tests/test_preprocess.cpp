#include "doctest.h"
#include "fixtures.hpp"

#include "mta/errors.hpp"
#include "mta/preprocess.hpp"

using namespace mta;

namespace {

std::size_t count_positive(const std::vector<Journey>& js) {
  std::size_t n = 0;
  for (const Journey& j : js) n += j.outcome > 0.0;
  return n;
}

}  // namespace

TEST_CASE("already filtered and balanced input is unchanged") {
  std::vector<Journey> in;
  for (std::size_t i = 0; i < 30; ++i) in.push_back(fixture::journey({{0, 0.0}, {0, 1.0}}, i == 7 ? 0.0 : 1.0));
  CHECK(preprocess(in, PreprocessConfig{}) == in);
}

TEST_CASE("300 positives + 900 negatives at 0.7 keeps 128 negatives") {
  CHECK(negatives_to_keep(300, 0.7) == 128);
  std::vector<Journey> in;
  for (std::size_t i = 0; i < 1200; ++i) {
    Journey j = fixture::journey({{0, 0.0}}, i % 4 == 0 ? 1.0 : 0.0);
    j.customer_id = "c" + std::to_string(i);
    in.push_back(j);
  }
  const auto out = preprocess(in, PreprocessConfig{});
  CHECK(count_positive(out) == 300);
  CHECK(out.size() == 428);
  CHECK(300.0 / 428.0 >= 0.7);
  // input order preserved
  for (std::size_t k = 1; k < out.size(); ++k) {
    CHECK(std::stoi(out[k].customer_id.substr(1)) > std::stoi(out[k - 1].customer_id.substr(1)));
  }
}

TEST_CASE("deterministic under a fixed subsample seed") {
  std::vector<Journey> in;
  for (std::size_t i = 0; i < 500; ++i) {
    Journey j = fixture::journey({{0, 0.0}}, i % 10 == 0 ? 1.0 : 0.0);
    j.customer_id = std::to_string(i);
    in.push_back(j);
  }
  PreprocessConfig config;
  config.subsample_seed = 99;
  const auto a = preprocess(in, config);
  CHECK(a == preprocess(in, config));
  config.subsample_seed = 100;
  CHECK_FALSE(a == preprocess(in, config));
}

TEST_CASE("long journeys are dropped; converting journeys survive balancing") {
  Rng rng(51);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<Journey> in;
    for (std::size_t i = 0; i < 200; ++i) {
      std::vector<Touch> t;
      const std::size_t k = 1 + rng.below(8);
      for (std::size_t m = 0; m < k; ++m) t.push_back({0, static_cast<double>(m)});
      Journey j = fixture::journey(t, rng.bernoulli(0.2) ? 1.0 : 0.0);
      j.customer_id = std::to_string(i);
      in.push_back(j);
    }
    PreprocessConfig config;
    config.subsample_seed = static_cast<std::uint64_t>(rep);
    const auto out = preprocess(in, config);
    std::size_t eligible_positive = 0;
    for (const Journey& j : in) eligible_positive += j.touches.size() <= 5 && j.outcome > 0.0;
    CHECK(count_positive(out) == eligible_positive);
    for (const Journey& j : out) CHECK(j.touches.size() <= 5);
    if (eligible_positive > 0) {
      CHECK(static_cast<double>(eligible_positive) / static_cast<double>(out.size()) >= 0.7);
    }
  }
}

TEST_CASE("max_customers caps the result") {
  std::vector<Journey> in;
  for (std::size_t i = 0; i < 100; ++i) in.push_back(fixture::journey({{0, 0.0}}, 1.0));
  PreprocessConfig config;
  config.max_customers = 10;
  CHECK(preprocess(in, config).size() == 10);
}

TEST_CASE("errors") {
  std::vector<Journey> in{fixture::journey({{0, 0.0}, {0, 1.0}}, 1.0)};
  PreprocessConfig config;
  config.max_touches = 1;
  CHECK_THROWS_AS(preprocess(in, config), EmptyDataset);
  config.max_touches = 0;
  CHECK_THROWS_AS(validate_preprocess_config(config), InvalidInput);
  config = PreprocessConfig{};
  config.target_positive_ratio = 1.0;
  CHECK_THROWS_AS(validate_preprocess_config(config), InvalidInput);
}
