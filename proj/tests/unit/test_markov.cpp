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

#include <random>

#include "error.hpp"
#include "markov.hpp"

using namespace stp;

namespace {

Eigen::MatrixXd example_matrix() {
  Eigen::MatrixXd m(3, 3);
  m << 0.1, 0.2, 0.7, 0.4, 0.1, 0.5, 0.0, 0.1, 0.9;
  return m;
}

Trajectory traj(std::initializer_list<std::size_t> cells) {
  Trajectory t;
  for (auto c : cells) t.cells.push_back(CellIndex{c});
  return t;
}

}  // namespace

TEST_CASE("train counts transitions") {
  const std::vector<Trajectory> alt{traj({0, 1, 0, 1})};
  const auto m = train(alt, 2, 0.0).at(1);
  CHECK(m(0, 0) == 0.0);
  CHECK(m(0, 1) == 1.0);
  CHECK(m(1, 0) == 1.0);

  const std::vector<Trajectory> stay{traj({0, 0, 1})};
  const auto half = train(stay, 2, 0.0).at(1);
  CHECK(half(0, 0) == doctest::Approx(0.5));
  CHECK(half(0, 1) == doctest::Approx(0.5));

  const std::vector<Trajectory> unseen{traj({0, 1, 0})};
  const auto smooth = train(unseen, 3, 1.0).at(1);
  for (int j = 0; j < 3; ++j) CHECK(smooth(2, j) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("train with no data is an empty corpus") {
  const std::vector<Trajectory> none;
  CHECK_THROWS_AS(train(none, 3, 0.0), Error);
}

TEST_CASE("synthetic gaussian model") {
  const auto flat = synth_gaussian(3, 3, 1e6).at(1);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 9; ++j) CHECK(flat(i, j) == doctest::Approx(1.0 / 9.0).epsilon(1e-6));
  }
  const auto sharp = synth_gaussian(3, 3, 0.1).at(1);
  for (int i = 0; i < 9; ++i) CHECK(sharp(i, i) > 0.99);
  for (double sigma : {0.3, 1.0, 2.5}) {
    const auto m = synth_gaussian(4, 5, sigma).at(1);
    CHECK((m.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("sample_trajectory follows deterministic chains") {
  const MarkovModel ident(Eigen::MatrixXd::Identity(3, 3));
  const auto a = sample_trajectory(ident, Distribution::point_mass(3, CellIndex{2}), 5, 11);
  REQUIRE(a.size() == 5);
  for (auto c : a.cells) CHECK(c.value == 2);

  Eigen::MatrixXd flip(2, 2);
  flip << 0, 1, 1, 0;
  const auto b = sample_trajectory(MarkovModel(flip), Distribution::point_mass(2, CellIndex{0}), 4, 3);
  const std::size_t want[] = {0, 1, 0, 1};
  for (std::size_t t = 0; t < 4; ++t) CHECK(b.cells[t].value == want[t]);
}

TEST_CASE("sample_trajectory is reproducible from its seed") {
  const auto model = synth_gaussian(4, 4, 1.0);
  const auto pi = Distribution::uniform(16);
  const auto a = sample_trajectory(model, pi, 30, 99);
  const auto b = sample_trajectory(model, pi, 30, 99);
  CHECK(a.cells == b.cells);
}

TEST_CASE("propagate") {
  const MarkovModel model(example_matrix());
  const auto pi = Distribution::point_mass(3, CellIndex{0});
  CHECK(propagate(pi, model, 0).probs() == pi.probs());
  const auto one = propagate(pi, model, 1).probs();
  CHECK(one(0) == doctest::Approx(0.1));
  CHECK(one(1) == doctest::Approx(0.2));
  CHECK(one(2) == doctest::Approx(0.7));

  Eigen::MatrixXd ds(3, 3);
  ds << 0.2, 0.3, 0.5, 0.5, 0.2, 0.3, 0.3, 0.5, 0.2;
  const auto u = propagate(Distribution::uniform(3), MarkovModel(ds), 7).probs();
  for (int i = 0; i < 3; ++i) CHECK(u(i) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("rows of trained and random models are stochastic") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Trajectory> data;
    for (int k = 0; k < 3; ++k) {
      Trajectory t;
      for (int s = 0; s < 12; ++s) t.cells.push_back(CellIndex{rng() % 6});
      data.push_back(t);
    }
    const auto m = train(data, 6, 0.1).at(1);
    CHECK((m.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    CHECK(m.minCoeff() >= 0.0);
  }
}

TEST_CASE("invalid matrices are rejected") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.6, 0.5, 0.5;
  CHECK_THROWS_AS(MarkovModel{bad}, Error);
  bad << -0.1, 1.1, 0.5, 0.5;
  CHECK_THROWS_AS(MarkovModel{bad}, Error);
}
