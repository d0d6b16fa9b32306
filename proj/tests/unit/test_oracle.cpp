// Copyright 2026 The stprivacy Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <doctest.h>

#include <cmath>

#include "../support/bridge.hpp"
#include "error.hpp"
#include "oracle.hpp"

using namespace stp;

namespace {

MarkovModel example_model() {
  Eigen::MatrixXd m(3, 3);
  m << 0.1, 0.2, 0.7, 0.4, 0.1, 0.5, 0.0, 0.1, 0.9;
  return MarkovModel(m);
}

}  // namespace

TEST_CASE("enumerated prior of the worked example") {
  const auto e = Event::presence(RegionMask({1, 1, 0}), 3, 4);
  const auto model = example_model();
  CHECK(std::abs(enumerate_prior(e, model, Distribution::point_mass(3, CellIndex{0}), 4) - 0.28) < 1e-12);
  CHECK(std::abs(enumerate_prior(e, model, Distribution::point_mass(3, CellIndex{1}), 4) - 0.298) < 1e-12);
}

TEST_CASE("tautology and contradiction") {
  const auto model = example_model();
  const auto pi = Distribution::uniform(3);
  const auto always = BoolEvent::any_of({BoolEvent::predicate(2, CellIndex{0}),
                                         BoolEvent::predicate(2, CellIndex{1}),
                                         BoolEvent::predicate(2, CellIndex{2})});
  CHECK(enumerate_prior(always, model, pi, 3) == doctest::Approx(1.0).epsilon(1e-12));
  const auto never = BoolEvent::all_of({BoolEvent::predicate(1, CellIndex{0}),
                                        BoolEvent::predicate(1, CellIndex{1})});
  CHECK(enumerate_prior(never, model, pi, 3) == 0.0);
}

TEST_CASE("single-step joint") {
  const auto model = example_model();
  const Distribution pi(Eigen::Vector3d(0.2, 0.3, 0.5));
  const std::vector<EmissionColumn> col{{Eigen::Vector3d(0.4, 0.7, 0.1)}};
  for (std::size_t i = 0; i < 3; ++i) {
    const auto e = Event::presence(RegionMask::from_cells(3, {i}), 1, 1);
    CHECK(enumerate_joint(e, model, pi, col) == doctest::Approx(pi[i] * col[0].probs(static_cast<Eigen::Index>(i))));
  }
}

TEST_CASE("library enumeration agrees with the test oracle") {
  brute::Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = brute::random_instance(rng, 3, 5);
    const auto e = bridge::event(in);
    const MarkovModel model(in.m);
    const Eigen::VectorXd pi = brute::dirichlet(static_cast<std::size_t>(in.m.rows()), rng);
    const auto cols = bridge::columns(in);
    CHECK(std::abs(enumerate_prior(e, model, Distribution(pi), in.end) - brute::prior(in, pi)) < 1e-12);
    CHECK(std::abs(enumerate_joint(e, model, Distribution(pi), cols) - brute::joint(in, pi)) < 1e-12);
    CHECK(std::abs(enumerate_joint(e, model, Distribution(pi), cols, World::EventFalse) -
                   brute::joint(in, pi, false)) < 1e-12);
  }
}

TEST_CASE("all-ones emissions reduce joint to prior") {
  brute::Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    auto in = brute::random_instance(rng, 3, 5);
    for (auto& e : in.emissions) e.setOnes();
    const Eigen::VectorXd pi = brute::dirichlet(static_cast<std::size_t>(in.m.rows()), rng);
    const auto e = bridge::event(in);
    const MarkovModel model(in.m);
    CHECK(std::abs(enumerate_joint(e, model, Distribution(pi), bridge::columns(in)) -
                   enumerate_prior(e, model, Distribution(pi), in.end)) < 1e-12);
  }
}

TEST_CASE("forward likelihood equals the sum over both worlds") {
  brute::Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const auto in = brute::random_instance(rng, 4, 5);
    const Eigen::VectorXd pi = brute::dirichlet(static_cast<std::size_t>(in.m.rows()), rng);
    const double total = brute::joint(in, pi, true) + brute::joint(in, pi, false);
    CHECK(std::abs(forward_likelihood(MarkovModel(in.m), Distribution(pi), bridge::columns(in)) - total) < 1e-12);
  }
}

TEST_CASE("enumeration refuses oversized instances") {
  const MarkovModel model(synth_gaussian(10, 10, 1.0));
  const auto e = Event::presence(RegionMask::from_cells(100, {0}), 1, 6);
  try {
    enumerate_prior(e, model, Distribution::uniform(100), 6);
    FAIL("expected TooLarge");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("bench pair on a tiny instance") {
  brute::Rng rng(4);
  Eigen::MatrixXd m = brute::random_stochastic(2, rng);
  BenchInstance inst{std::make_shared<const MarkovModel>(m),
                     Event::presence(RegionMask({1, 0}), 2, 3), Distribution::uniform(2),
                     {{Eigen::Vector2d(0.3, 0.6)}, {Eigen::Vector2d(0.5, 0.2)}, {Eigen::Vector2d(0.9, 0.4)}}};
  const auto timing = bench_pair(inst, 3);
  CHECK(std::abs(timing.fast_value - timing.naive_value) < 1e-12);
  CHECK(timing.fast_ns < 1e6);
  CHECK(timing.naive_ns < 1e6);
}
