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

#include "checker.hpp"
#include "error.hpp"
#include "priste.hpp"

using namespace stp;

namespace {

struct Setup {
  GridMap map{3, 3, 1000.0};
  std::shared_ptr<const MarkovModel> model =
      std::make_shared<const MarkovModel>(synth_gaussian(3, 3, 1.0));
  std::vector<Event> events{Event::presence(RegionMask::from_cells(9, {0, 1}), 2, 3)};
  Trajectory traj = sample_trajectory(*model, Distribution::uniform(9), 6, 21);

  SessionConfig config(double eps, MechanismKind kind = MechanismKind::PlanarLaplace) const {
    SessionConfig c;
    c.epsilon = eps;
    c.mechanism = kind;
    c.horizon = 6;
    c.initial_alpha = 1.0;
    c.seed = 5;
    return c;
  }
};

}  // namespace

TEST_CASE("mechanism names") {
  CHECK(mechanism_from_string("plm") == MechanismKind::PlanarLaplace);
  CHECK(mechanism_from_string("plm_deltaset") == MechanismKind::PlanarLaplaceDeltaSet);
  CHECK(std::string(to_string(MechanismKind::Uniform)) == "uniform");
  CHECK_THROWS_AS(mechanism_from_string("gauss"), Error);
}

TEST_CASE("huge epsilon needs no calibration") {
  Setup s;
  ReleaseSession session(s.map, s.model, s.events, s.config(50.0));
  for (const auto& r : run_session(session, s.traj)) {
    CHECK(r.halvings == 0);
    CHECK(r.alpha_used == 1.0);
  }
}

TEST_CASE("single uniform release") {
  Setup s;
  auto c = s.config(0.1, MechanismKind::Uniform);
  c.horizon = 1;
  ReleaseSession session(s.map, s.model, {Event::presence(RegionMask::from_cells(9, {0}), 1, 1)}, c);
  const auto r = session.step(CellIndex{4});
  CHECK(r.t == 1);
  CHECK(r.halvings == 0);
  CHECK(session.released().size() == 1);
}

TEST_CASE("sessions are deterministic") {
  Setup s;
  ReleaseSession a(s.map, s.model, s.events, s.config(0.5));
  ReleaseSession b(s.map, s.model, s.events, s.config(0.5));
  const auto ra = run_session(a, s.traj);
  const auto rb = run_session(b, s.traj);
  REQUIRE(ra.size() == rb.size());
  for (std::size_t k = 0; k < ra.size(); ++k) {
    CHECK(ra[k].observed_cell == rb[k].observed_cell);
    CHECK(ra[k].alpha_used == rb[k].alpha_used);
  }
}

TEST_CASE("released sequences satisfy the guarantee for sampled distributions") {
  Setup s;
  for (double eps : {0.2, 1.0}) {
    for (auto kind : {MechanismKind::PlanarLaplace, MechanismKind::PlanarLaplaceDeltaSet}) {
      ReleaseSession session(s.map, s.model, s.events, s.config(eps, kind));
      run_session(session, s.traj);
      Rng rng(3);
      std::gamma_distribution<double> g(0.5, 1.0);
      int checked = 0;
      for (int k = 0; k < 100; ++k) {
        Eigen::VectorXd pi(9);
        for (int i = 0; i < 9; ++i) pi(i) = g(rng) + 1e-12;
        try {
          const auto r = quantify_fixed_pi(session.chains()[0], Distribution(pi / pi.sum()),
                                           session.emissions(), eps);
          CHECK(r.holds);
          ++checked;
        } catch (const Error& e) {
          CHECK(e.code() == ErrorCode::DegeneratePrior);
        }
      }
      CHECK(checked > 50);
    }
  }
}

TEST_CASE("posteriors stay normalized") {
  Setup s;
  auto c = s.config(0.5, MechanismKind::PlanarLaplaceDeltaSet);
  c.delta = 0.2;
  ReleaseSession session(s.map, s.model, s.events, c);
  for (auto cell : s.traj.cells) {
    session.step(cell);
    CHECK(std::abs(session.p_plus().probs().sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("zero delta matches the plain mechanism when the prior has full support") {
  Setup s;
  auto plain = s.config(0.5);
  auto wrapped = s.config(0.5, MechanismKind::PlanarLaplaceDeltaSet);
  wrapped.delta = 0.0;
  ReleaseSession a(s.map, s.model, s.events, plain);
  ReleaseSession b(s.map, s.model, s.events, wrapped);
  const auto ra = run_session(a, s.traj);
  const auto rb = run_session(b, s.traj);
  for (std::size_t k = 0; k < ra.size(); ++k) {
    CHECK(ra[k].observed_cell == rb[k].observed_cell);
    CHECK(ra[k].alpha_used == doctest::Approx(rb[k].alpha_used));
  }
}

TEST_CASE("stricter epsilon never releases a larger budget on average") {
  Setup s;
  double prev = 0.0;
  for (double eps : {0.05, 0.5, 5.0}) {
    double sum = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto c = s.config(eps);
      c.seed = seed;
      ReleaseSession session(s.map, s.model, s.events, c);
      for (const auto& r : run_session(session, s.traj)) sum += r.alpha_used;
    }
    CHECK(sum >= prev);
    prev = sum;
  }
}

TEST_CASE("forced uniform release after too many halvings") {
  Setup s;
  auto c = s.config(1e-6);
  c.max_halvings = 1;
  ReleaseSession session(s.map, s.model, s.events, c);
  bool forced = false;
  for (const auto& r : run_session(session, s.traj)) forced = forced || r.forced_uniform;
  CHECK(forced);
}

TEST_CASE("steps past the horizon are rejected") {
  Setup s;
  auto c = s.config(1.0);
  c.horizon = 3;
  ReleaseSession session(s.map, s.model, s.events, c);
  for (int k = 0; k < 3; ++k) session.step(CellIndex{0});
  try {
    session.step(CellIndex{0});
    FAIL("expected HorizonExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HorizonExceeded);
  }
}
