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
#include <memory>

#include "../support/bridge.hpp"
#include "error.hpp"
#include "twoworld.hpp"

using namespace stp;

namespace {

std::shared_ptr<const MarkovModel> example_model() {
  Eigen::MatrixXd m(3, 3);
  m << 0.1, 0.2, 0.7, 0.4, 0.1, 0.5, 0.0, 0.1, 0.9;
  return std::make_shared<const MarkovModel>(m);
}

Event example_event() { return Event::presence(RegionMask({1, 1, 0}), 3, 4); }

Distribution basis(std::size_t i) { return Distribution::point_mass(3, CellIndex{i}); }

}  // namespace

TEST_CASE("example chain matrices") {
  const AugmentedChain chain(example_event(), example_model(), 4);
  const Eigen::MatrixXd m1 = chain.dense(1);
  Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(6, 6);
  diag.topLeftCorner(3, 3) = example_model()->at(1);
  diag.bottomRightCorner(3, 3) = example_model()->at(1);
  CHECK((m1 - diag).cwiseAbs().maxCoeff() < 1e-15);

  const Eigen::MatrixXd m2 = chain.dense(2);
  Eigen::RowVectorXd first(6);
  first << 0, 0, 0.7, 0.1, 0.2, 0;
  CHECK((m2.row(0) - first).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(chain.kind_at(2) == BlockKind::Enter);
  CHECK(chain.kind_at(3) == BlockKind::Enter);
}

TEST_CASE("example prior") {
  const AugmentedChain chain(example_event(), example_model(), 4);
  CHECK(prior(chain, basis(0)) == doctest::Approx(0.28).epsilon(1e-12));
  CHECK(prior(chain, basis(1)) == doctest::Approx(0.298).epsilon(1e-12));
  CHECK(prior(chain, basis(2)) == doctest::Approx(0.226).epsilon(1e-12));
}

TEST_CASE("empty and full regions") {
  const AugmentedChain empty(Event::presence(RegionMask::none(3), 2, 3), example_model(), 3);
  for (std::size_t t = 1; t < 3; ++t) {
    const Eigen::MatrixXd d = empty.dense(t);
    CHECK(d.topRightCorner(3, 3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(d.bottomLeftCorner(3, 3).cwiseAbs().maxCoeff() == 0.0);
  }
  const AugmentedChain full(Event::presence(RegionMask::all(3), 2, 3), example_model(), 3);
  const Eigen::MatrixXd d = full.dense(1);
  CHECK(d.topLeftCorner(3, 3).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((d.topRightCorner(3, 3) - example_model()->at(1)).cwiseAbs().maxCoeff() < 1e-15);
  for (std::size_t i = 0; i < 3; ++i) CHECK(prior(full, basis(i)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("joint with vacuous or impossible observations") {
  const AugmentedChain chain(example_event(), example_model(), 6);
  const Distribution pi(Eigen::Vector3d(0.2, 0.5, 0.3));
  std::vector<EmissionColumn> ones(4, EmissionColumn::ones(3));
  CHECK(std::abs(joint(chain, pi, ones).value() - prior(chain, pi)) < 1e-12);

  auto zero = ones;
  zero[1].probs.setZero();
  CHECK(joint(chain, pi, zero).value() == 0.0);

  std::vector<EmissionColumn> at_end(4, EmissionColumn{Eigen::Vector3d(0.3, 0.9, 0.2)});
  auto past = at_end;
  past.push_back(EmissionColumn::ones(3));
  past.push_back(EmissionColumn::ones(3));
  CHECK(std::abs(joint_after(chain, pi, past).value() -
                 joint_before(chain, pi, at_end).value()) < 1e-12);
}

TEST_CASE("prior and joint match brute force") {
  brute::Rng rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const auto in = brute::random_instance(rng, 4, 6);
    const auto chain = bridge::chain(in);
    const auto cols = bridge::columns(in);
    const Eigen::VectorXd pi = brute::dirichlet(static_cast<std::size_t>(in.m.rows()), rng);
    const Distribution d(pi);
    CHECK(std::abs(prior(chain, d) - brute::prior(in, pi)) < 1e-9);
    CHECK(std::abs(joint(chain, d, cols, World::EventTrue).value() - brute::joint(in, pi, true)) < 1e-9);
    CHECK(std::abs(joint(chain, d, cols, World::EventFalse).value() - brute::joint(in, pi, false)) < 1e-9);
  }
}

TEST_CASE("every lifted transition is row-stochastic") {
  brute::Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = brute::random_instance(rng, 5, 7);
    const auto chain = bridge::chain(in);
    for (std::size_t t = 0; t < chain.horizon(); ++t) {
      const Eigen::MatrixXd d = chain.dense(t);
      CHECK((d.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("check vectors reproduce the joint for every distribution") {
  brute::Rng rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto in = brute::random_instance(rng, 4, 6);
    const auto chain = bridge::chain(in);
    const auto cols = bridge::columns(in);
    const std::size_t m = static_cast<std::size_t>(in.m.rows());
    CheckVectors cv(chain);
    for (std::size_t t = 1; t <= cols.size(); ++t) {
      cv = advance(std::move(cv), chain, t, cols[t - 1]);
      brute::Instance prefix = in;
      prefix.emissions.resize(t);
      for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd pi = brute::dirichlet(m, rng);
        const double scale = std::exp(cv.log_scale());
        const double jt = pi.dot(cv.b()) * scale;
        const double total = pi.dot(cv.c()) * scale;
        const double bt = brute::joint(prefix, pi, true);
        const double bf = brute::joint(prefix, pi, false);
        CHECK(std::abs(jt - bt) < 1e-9);
        CHECK(std::abs(total - (bt + bf)) < 1e-9);
        CHECK(std::abs(pi.dot(cv.a()) - brute::prior(in, pi)) < 1e-9);
      }
    }
  }
}

TEST_CASE("check vectors with vacuous observations") {
  const AugmentedChain chain(example_event(), example_model(), 6);
  CheckVectors cv(chain);
  for (std::size_t t = 1; t <= 6; ++t) {
    cv = advance(std::move(cv), chain, EmissionColumn::ones(3));
    const double scale = std::exp(cv.log_scale());
    CHECK(((cv.b() * scale) - cv.a()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(((cv.c() * scale).array() - 1.0).abs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("check vectors reject gaps and overruns") {
  const AugmentedChain chain(example_event(), example_model(), 4);
  CheckVectors cv(chain);
  try {
    advance(cv, chain, 2, EmissionColumn::ones(3));
    FAIL("expected OutOfOrder");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfOrder);
  }
  for (std::size_t t = 1; t <= 4; ++t) cv = advance(std::move(cv), chain, t, EmissionColumn::ones(3));
  CHECK_THROWS_AS(advance(cv, chain, 5, EmissionColumn::ones(3)), Error);
}

TEST_CASE("long runs stay finite under rescaling") {
  auto model = std::make_shared<const MarkovModel>(synth_gaussian(4, 4, 1.0));
  const AugmentedChain chain(Event::presence(RegionMask::from_cells(16, {0, 1, 2}), 5, 9),
                             model, 400);
  CheckVectors cv(chain);
  Eigen::VectorXd col = Eigen::VectorXd::Constant(16, 1e-3);
  col(5) = 2e-3;
  for (std::size_t t = 1; t <= 400; ++t) cv = advance(std::move(cv), chain, EmissionColumn{col});
  CHECK(cv.b().allFinite());
  CHECK(cv.c().maxCoeff() > 0.0);
  CHECK(std::isfinite(cv.log_scale()));
}
