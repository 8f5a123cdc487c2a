#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"

#include "mta/errors.hpp"
#include "mta/model.hpp"
#include "mta/rng.hpp"

using namespace mta;

namespace {

ModelSpec spec_of(std::size_t c, Link link = Link::identity, bool re = false, bool inter = true) {
  ModelSpec s;
  s.n_channels = c;
  s.link = link;
  s.include_random_effects = re;
  s.include_interaction = inter;
  return s;
}

ModelParams params_of(std::vector<double> beta, std::vector<double> lambda, double mu = 0.0,
                      double gamma = 0.0) {
  ModelParams p;
  p.beta = std::move(beta);
  p.lambda = std::move(lambda);
  p.mu = mu;
  p.gamma = gamma;
  return p;
}

}  // namespace

TEST_CASE("single touch, one day elapsed") {
  const Journey j = fixture::journey({{0, 0.0}}, 0.0, 1.0);
  const ModelParams p = params_of({0.5}, {0.5});
  CHECK(linear_predictor(j, p, spec_of(1)) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("only baseline terms survive when beta is zero") {
  const Journey j = fixture::journey({{0, 0.0}, {1, 2.0}});
  ModelParams p = params_of({0.0, 0.0}, {0.3, 0.9}, 2.0, 1.7);
  p.b = {-0.5};
  CHECK(linear_predictor(j, p, spec_of(2, Link::identity, true)) == doctest::Approx(1.5));
}

TEST_CASE("two touches with interaction matches ordered-pair oracle") {
  const Journey j = fixture::journey({{0, 0.0}, {1, 1.0}}, 0.0, 1.0);
  const ModelParams p = params_of({0.5, 0.4}, {0.5, 0.8}, 0.0, 1.0);
  const double eta = linear_predictor(j, p, spec_of(2));
  CHECK(eta == doctest::Approx(0.85).epsilon(1e-14));
  CHECK(eta == doctest::Approx(oracle::predictor(j, p, true)).epsilon(1e-14));
}

TEST_CASE("same channel twice forms a valid pair") {
  const Journey j = fixture::journey({{0, 0.0}, {0, 0.0}}, 0.0, 0.0);
  const ModelParams p = params_of({1.0}, {0.5}, 0.0, 1.0);
  // 1 + 1 + 2 * (1 * 1)
  CHECK(linear_predictor(j, p, spec_of(1)) == doctest::Approx(4.0));
}

TEST_CASE("flags zero their terms") {
  const Journey j = fixture::journey({{0, 0.0}, {1, 0.5}});
  ModelParams p = params_of({0.7, 0.2}, {0.4, 0.6}, 0.3, 2.0);
  p.b = {5.0};
  const double no_re = linear_predictor(j, p, spec_of(2, Link::identity, false, true));
  const double no_int = linear_predictor(j, p, spec_of(2, Link::identity, true, false));
  CHECK(no_re == doctest::Approx(oracle::predictor(j, p, true, 0.0)));
  CHECK(no_int == doctest::Approx(oracle::predictor(j, p, false, 5.0)));
}

TEST_CASE("linear predictor matches brute-force oracle on random journeys") {
  Rng rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    const ModelSpec spec = spec_of(4, Link::identity, true, rep % 2 == 0);
    const auto data = fixture::random_dataset(rng, 1, 4, Link::identity, 8);
    const ModelParams p = fixture::random_params(rng, spec, 1);
    const double got = linear_predictor(data[0], p, spec, 0);
    const double want = oracle::predictor(data[0], p, spec.include_interaction, p.b[0]);
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("channel out of range is rejected") {
  const Journey j = fixture::journey({{3, 0.0}});
  CHECK_THROWS_AS(linear_predictor(j, params_of({1, 1}, {0.5, 0.5}), spec_of(2)), InvalidInput);
  CHECK_THROWS_AS(validate_journey(j, 2), InvalidInput);
}

TEST_CASE("non-finite predictor is a numeric error") {
  const Journey j = fixture::journey({{0, 0.0}, {0, 0.0}});
  const ModelParams p = params_of({1e200}, {0.5}, 0.0, 1.0);
  CHECK_THROWS_AS(linear_predictor(j, p, spec_of(1)), NumericError);
}

TEST_CASE("journey validation") {
  CHECK_THROWS_AS(validate_journey(fixture::journey({}), 1), InvalidInput);
  CHECK_THROWS_AS(validate_journey(fixture::journey({{0, 1.0}, {0, 0.5}}), 1), InvalidInput);
  CHECK_THROWS_AS(validate_journey(fixture::journey({{0, -1.0}}), 1), InvalidInput);
  CHECK_THROWS_AS(validate_journey(fixture::journey({{0, 2.0}}, 0.0, 1.0), 1), InvalidInput);
  CHECK_NOTHROW(validate_journey(fixture::journey({{0, 0.0}, {0, 0.0}}), 1));
}

TEST_CASE("parameter validation") {
  const ModelSpec spec = spec_of(1);
  CHECK_THROWS_AS(validate_params(params_of({-0.1}, {0.5}), spec), InvalidInput);
  CHECK_THROWS_AS(validate_params(params_of({0.1}, {1.0}), spec), InvalidInput);
  CHECK_THROWS_AS(validate_params(params_of({0.1}, {0.0}), spec), InvalidInput);
  CHECK_NOTHROW(validate_params(params_of({0.0}, {0.5}), spec));
}

TEST_CASE("links") {
  CHECK(apply_link(0.0, Link::logit) == 0.5);
  CHECK(apply_link(3.7, Link::identity) == 3.7);
  const double tiny = apply_link(-40.0, Link::logit);
  CHECK(tiny > 0.0);
  CHECK(tiny <= 1e-17);
  CHECK(log_sigmoid(-40.0) == doctest::Approx(-40.0).epsilon(1e-15));
  CHECK(std::isfinite(log_sigmoid(-800.0)));
  CHECK(apply_link(800.0, Link::logit) == 1.0);
  CHECK(link_from_string("logit") == Link::logit);
  CHECK(to_string(Link::identity) == "identity");
  CHECK_THROWS_AS(link_from_string("probit"), InvalidInput);
}

TEST_CASE("predict") {
  const Journey j = fixture::journey({{0, 0.0}}, 0.0, 1.0);
  const ModelParams p = params_of({0.5}, {0.5});
  CHECK(predict(j, p, spec_of(1, Link::logit)) == doctest::Approx(1.0 / (1.0 + std::exp(-0.25))));
  CHECK(predict(j, p, spec_of(1, Link::logit)) == doctest::Approx(0.5622).epsilon(1e-4));
  const ModelParams zero = params_of({0.0}, {0.5});
  CHECK(predict(j, zero, spec_of(1, Link::logit)) == 0.5);
  CHECK(predict(j, p, spec_of(1)) == linear_predictor(j, p, spec_of(1)));
}

TEST_CASE("property: permuting touches leaves the predictor unchanged") {
  Rng rng(3);
  for (int rep = 0; rep < 100; ++rep) {
    const ModelSpec spec = spec_of(3);
    auto data = fixture::random_dataset(rng, 1, 3, Link::identity, 7);
    const ModelParams p = fixture::random_params(rng, spec, 0);
    const double before = linear_predictor(data[0].touches, data[0].eval_time, p, spec);
    auto touches = data[0].touches;
    std::reverse(touches.begin(), touches.end());
    std::rotate(touches.begin(), touches.begin() + touches.size() / 2, touches.end());
    CHECK(linear_predictor(touches, data[0].eval_time, p, spec) ==
          doctest::Approx(before).epsilon(1e-13));
  }
}

TEST_CASE("property: additive over disjoint touch sets when gamma is zero") {
  Rng rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    const ModelSpec spec = spec_of(3, Link::identity, false, true);
    auto data = fixture::random_dataset(rng, 1, 3, Link::identity, 8);
    ModelParams p = fixture::random_params(rng, spec, 0);
    p.gamma = 0.0;
    const auto& all = data[0].touches;
    const std::size_t cut = all.size() / 2;
    const std::vector<Touch> t1(all.begin(), all.begin() + cut);
    const std::vector<Touch> t2(all.begin() + cut, all.end());
    const double e = data[0].eval_time;
    const double joined = linear_predictor(all, e, p, spec);
    const double split = linear_predictor(t1, e, p, spec) + linear_predictor(t2, e, p, spec) - p.mu;
    CHECK(joined == doctest::Approx(split).epsilon(1e-13));
  }
}

TEST_CASE("property: monotone in beta when gamma >= 0") {
  Rng rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    const ModelSpec spec = spec_of(3);
    auto data = fixture::random_dataset(rng, 1, 3, Link::identity, 6);
    ModelParams p = fixture::random_params(rng, spec, 0);
    p.gamma = std::abs(p.gamma);
    const double base = linear_predictor(data[0], p, spec);
    const std::size_t c = rng.below(3);
    p.beta[c] += rng.uniform(0.0, 1.0);
    CHECK(linear_predictor(data[0], p, spec) >= base);
  }
}

TEST_CASE("property: touch terms vanish as eval_time grows") {
  const ModelSpec spec = spec_of(2);
  const ModelParams p = params_of({0.9, 0.8}, {0.5, 0.9}, -1.25, 0.7);
  std::vector<Touch> t{{0, 0.0}, {1, 1.0}, {1, 2.0}};
  double previous_gap = 1e300;
  for (double e : {2.0, 10.0, 100.0, 1000.0, 10000.0}) {
    const double gap = std::abs(linear_predictor(t, e, p, spec) - p.mu);
    CHECK(gap <= previous_gap);
    previous_gap = gap;
  }
  CHECK(linear_predictor(t, 1e4, p, spec) == doctest::Approx(-1.25).epsilon(1e-15));
}

TEST_CASE("property: decay lies in (0, 1]") {
  Rng rng(6);
  for (int rep = 0; rep < 1000; ++rep) {
    const double lam = rng.uniform_open();
    const double delta = rng.exponential(0.2);
    const double d = decay(lam, delta);
    CHECK(d > 0.0);
    CHECK(d <= 1.0);
  }
  CHECK(decay(0.3, 0.0) == 1.0);
  CHECK(half_life(0.5) == 1.0);
}
