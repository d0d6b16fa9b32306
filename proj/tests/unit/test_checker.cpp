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
#include <variant>

#include "../support/bridge.hpp"
#include "checker.hpp"
#include "error.hpp"

using namespace stp;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

// Largest value of the condition over a fine simplex grid (m = 3).
double grid_max3(const QuadraticCondition& c, int steps) {
  double best = -1e300;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      const Eigen::Vector3d p(i, j, steps - i - j);
      best = std::max(best, c.value(p / steps));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("negative definite form is certified") {
  const auto c = QuadraticCondition::dense(-Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3));
  CHECK(std::holds_alternative<Certified>(certify(c)));
}

TEST_CASE("linear form is refuted at a vertex") {
  const auto c = QuadraticCondition::dense(Eigen::MatrixXd::Zero(2, 2), vec({0.5, -1.0}));
  const auto v = certify(c);
  REQUIRE(std::holds_alternative<Refuted>(v));
  const auto& r = std::get<Refuted>(v);
  CHECK(r.witness(0) == doctest::Approx(1.0));
  CHECK(r.witness(1) == doctest::Approx(0.0));
  CHECK(r.margin == doctest::Approx(0.5));
}

TEST_CASE("indefinite form that is constant on the simplex") {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = -1.0;
  const auto c = QuadraticCondition::dense(q, vec({-2.0, 0.0}));
  for (double x : {0.0, 0.25, 0.5, 0.9}) CHECK(c.value(vec({x, 1.0 - x})) == doctest::Approx(-1.0));
  const auto v = certify(c);
  REQUIRE(std::holds_alternative<Certified>(v));
  CHECK(std::get<Certified>(v).upper <= 0.0);
}

TEST_CASE("exhausted budget yields a timed-out unknown") {
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = -1.0;
  const auto c = QuadraticCondition::dense(q, vec({-2.0, 0.0}));
  CertifyOptions opt;
  opt.budget_ms = 0.0;
  const auto v = certify(c, opt);
  REQUIRE(std::holds_alternative<Unknown>(v));
  CHECK(std::get<Unknown>(v).timed_out);
}

TEST_CASE("box feasible set") {
  CertifyOptions opt;
  opt.feasible = FeasibleSet::Box;
  const auto lin = QuadraticCondition::dense(Eigen::MatrixXd::Zero(2, 2), vec({0.5, -1.0}));
  CHECK(std::holds_alternative<Refuted>(certify(lin, opt)));
  const auto neg = QuadraticCondition::dense(-Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3));
  CHECK(std::holds_alternative<Certified>(certify(neg, opt)));
}

TEST_CASE("edge scan finds interior maxima") {
  brute::Rng rng(12);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::VectorXd u(3), v(3), l(3);
    for (int i = 0; i < 3; ++i) {
      u(i) = n(rng);
      v(i) = n(rng);
      l(i) = n(rng);
    }
    const auto c = QuadraticCondition::rank_two(u, v, l);
    const auto [best, point] = edge_scan_max(c);
    CHECK(std::abs(c.value(point) - best) < 1e-12);
    CHECK(best >= grid_max3(c, 300) - 1e-12);
  }
}

TEST_CASE("dense and factored forms give the same verdict") {
  brute::Rng rng(41);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd u(4), v(4), l(4);
    for (int i = 0; i < 4; ++i) {
      u(i) = std::abs(n(rng));
      v(i) = n(rng);
      l(i) = n(rng) - 1.5;
    }
    const auto f = QuadraticCondition::rank_two(u, v, l);
    const auto d = QuadraticCondition::dense(f.q(), l);
    CHECK(certify(f).index() == certify(d).index());
  }
}

TEST_CASE("spectral bound dominates the maximum") {
  brute::Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd q(3, 3);
    for (int i = 0; i < 9; ++i) q(i / 3, i % 3) = n(rng);
    const auto c = QuadraticCondition::dense(q, vec({n(rng), n(rng), n(rng)}));
    CHECK(upper_bound(c, FeasibleSet::Simplex) >= grid_max3(c, 60) - 1e-12);
  }
}

TEST_CASE("degenerate conditions are rejected") {
  const auto pair = build_conditions(Eigen::VectorXd::Zero(2), vec({0.1, 0.2}), vec({0.3, 0.4}),
                                     PrivacyParams{1.0});
  try {
    certify(pair.forward);
    FAIL("expected DegenerateEvent");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateEvent);
  }
}

TEST_CASE("uninformative observations are certified for any epsilon") {
  brute::Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    auto in = brute::random_instance(rng, 4, 6);
    for (auto& e : in.emissions) e.setConstant(0.25);
    const auto chain = bridge::chain(in);
    const auto cols = bridge::columns(in);
    CheckVectors cv(chain);
    for (const auto& col : cols) cv = advance(std::move(cv), chain, col);
    if (!(cv.a().maxCoeff() > 0.0)) continue;
    for (double eps : {0.01, 0.5, 2.0}) {
      const auto pair = build_conditions(cv, PrivacyParams{eps});
      CHECK(is_certified(certify(pair.forward)));
      CHECK(is_certified(certify(pair.backward)));
    }
    for (int k = 0; k < 10; ++k) {
      const Distribution pi(brute::dirichlet(static_cast<std::size_t>(in.m.rows()), rng));
      try {
        const auto r = quantify_fixed_pi(chain, pi, cols, 0.1);
        CHECK(r.ratio_fwd == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(r.holds);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegeneratePrior);
      }
    }
  }
}

TEST_CASE("a huge epsilon always certifies") {
  brute::Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const auto in = brute::random_instance(rng, 4, 6);
    const auto chain = bridge::chain(in);
    CheckVectors cv(chain);
    for (const auto& col : bridge::columns(in)) cv = advance(std::move(cv), chain, col);
    if (!(cv.a().maxCoeff() > 0.0) || cv.a().minCoeff() >= 1.0 - 1e-12) continue;
    const auto pair = build_conditions(cv, PrivacyParams{50.0});
    CHECK(is_certified(certify(pair.backward)));
  }
}

TEST_CASE("revealing observations fail the fixed-distribution check") {
  Eigen::MatrixXd m(3, 3);
  m << 0.1, 0.2, 0.7, 0.4, 0.1, 0.5, 0.0, 0.1, 0.9;
  auto model = std::make_shared<const MarkovModel>(m);
  const auto e = Event::presence(RegionMask({1, 1, 0}), 2, 3);
  std::vector<EmissionColumn> cols(3, EmissionColumn{Eigen::Vector3d(0.5, 0.5, 0.5)});
  cols[1].probs = Eigen::Vector3d(1.0, 1.0, 0.0);
  cols[2].probs = Eigen::Vector3d(1.0, 1.0, 0.0);
  const auto r = quantify_fixed_pi(e, model, Distribution::uniform(3), cols, 0.5);
  CHECK_FALSE(r.holds);
  CHECK(r.ratio_fwd > std::exp(0.5));
}

TEST_CASE("certified verdicts hold and refutations are real") {
  brute::Rng rng(1001);
  int certified = 0, refuted = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const auto in = brute::random_instance(rng, 4, 5);
    const auto chain = bridge::chain(in);
    const auto cols = bridge::columns(in);
    CheckVectors cv(chain);
    for (const auto& col : cols) cv = advance(std::move(cv), chain, col);
    if (!(cv.a().maxCoeff() > 0.0)) continue;
    const double eps = 0.5;
    const auto pair = build_conditions(cv, PrivacyParams{eps});
    const auto fwd = certify(pair.forward);
    const auto bwd = certify(pair.backward);
    const std::size_t m = static_cast<std::size_t>(in.m.rows());
    if (is_certified(fwd) && is_certified(bwd)) {
      ++certified;
      for (int k = 0; k < 100; ++k) {
        const Eigen::VectorXd pi = brute::dirichlet(m, rng, 0.3);
        const double p = brute::prior(in, pi);
        if (p < 1e-9 || p > 1.0 - 1e-9) continue;
        const double ratio = (brute::joint(in, pi, true) / p) / (brute::joint(in, pi, false) / (1.0 - p));
        CHECK(std::abs(std::log(ratio)) <= eps + 1e-9);
      }
    }
    for (const auto* v : {&fwd, &bwd}) {
      if (const auto* r = std::get_if<Refuted>(v)) {
        ++refuted;
        const auto& cond = v == &fwd ? pair.forward : pair.backward;
        CHECK(cond.value(r->witness) > 0.0);
        CHECK(std::abs(r->witness.sum() - 1.0) < 1e-12);
      }
    }
  }
  CHECK(certified > 0);
  CHECK(refuted > 0);
}
