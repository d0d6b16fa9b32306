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

#include <json.hpp>

#include "error.hpp"
#include "events.hpp"

using namespace stp;

namespace {

RegionMask mask(std::vector<std::uint8_t> bits) { return RegionMask(std::move(bits)); }

Trajectory traj(std::initializer_list<std::size_t> cells) {
  Trajectory t;
  for (auto c : cells) t.cells.push_back(CellIndex{c});
  return t;
}

}  // namespace

TEST_CASE("lower renders presence as a disjunction") {
  const auto e = Event::presence(mask({1, 1, 0}), 3, 4);
  CHECK(lower(e).to_string() == "((u3=s1)|(u3=s2)|(u4=s1)|(u4=s2))");
}

TEST_CASE("lower renders pattern as a conjunction of disjunctions") {
  const auto e = Event::pattern({mask({1, 1, 0}), mask({0, 1, 1})}, 2);
  CHECK(e.end() == 3);
  CHECK(lower(e).to_string() == "(((u2=s1)|(u2=s2))&((u3=s2)|(u3=s3)))");
}

TEST_CASE("full-map presence is a tautology") {
  const auto e = Event::presence(mask({1, 1}), 1, 1);
  CHECK(lower(e).to_string() == "((u1=s1)|(u1=s2))");
  for (std::size_t c = 0; c < 2; ++c) CHECK(evaluate(lower(e), traj({c})));
}

TEST_CASE("evaluate predicates") {
  CHECK(evaluate(BoolEvent::predicate(2, CellIndex{0}), traj({2, 0, 1})));
  const auto never = BoolEvent::all_of(
      {BoolEvent::predicate(1, CellIndex{0}), BoolEvent::predicate(1, CellIndex{1})});
  for (std::size_t c = 0; c < 3; ++c) CHECK_FALSE(evaluate(never, traj({c, 0})));
  const auto neg = BoolEvent::negate(BoolEvent::predicate(1, CellIndex{0}));
  CHECK(evaluate(neg, traj({1})));
  CHECK_FALSE(evaluate(neg, traj({0})));
}

TEST_CASE("lowered events agree with direct membership") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + rng() % 3;
    const std::size_t start = 1 + rng() % 3;
    const std::size_t len = 1 + rng() % 3;
    auto random_mask = [&] {
      std::vector<std::uint8_t> b(m);
      for (auto& x : b) x = static_cast<std::uint8_t>(rng() % 2);
      return RegionMask(b);
    };
    std::vector<RegionMask> regions;
    for (std::size_t k = 0; k < len; ++k) regions.push_back(random_mask());
    const auto e = trial % 2 ? Event::pattern(regions, start)
                             : Event::presence(regions[0], start, start + len - 1);
    Trajectory t;
    for (std::size_t k = 0; k < start + len; ++k) t.cells.push_back(CellIndex{rng() % m});
    CHECK(evaluate(lower(e), t) == e.occurs_in(t));
  }
}

TEST_CASE("event validation") {
  CHECK_THROWS_AS(Event::presence(mask({1, 0}), 0, 2), Error);
  CHECK_THROWS_AS(Event::presence(mask({1, 0}), 3, 2), Error);
  const auto e = Event::presence(mask({1, 0}), 2, 4);
  try {
    e.validate(2, 3);
    FAIL("expected WindowOutOfRange");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::WindowOutOfRange);
  }
  CHECK_THROWS_AS(e.validate(3, 10), Error);
  CHECK_NOTHROW(e.validate(2, 4));
}

TEST_CASE("events round trip through json") {
  const auto doc = nlohmann::json::parse(R"([
    {"kind": "PRESENCE", "cells": [[0, 2]], "start": 2, "end": 5},
    {"kind": "pattern", "regions": [[1, 0, 0], [0, 1, 1]], "start": 1}
  ])");
  const auto events = events_from_json(doc, 3);
  REQUIRE(events.size() == 2);
  CHECK(events[0].kind() == EventKind::Presence);
  CHECK(events[0].regions()[0] == mask({1, 0, 1}));
  CHECK(events[1].end() == 2);
  const auto again = event_from_json(event_to_json(events[1]), 3);
  CHECK(again.regions() == events[1].regions());
  CHECK(again.start() == 1);
}

TEST_CASE("malformed event json") {
  CHECK_THROWS_AS(event_from_json(nlohmann::json::parse(R"({"kind": "often", "cells": [[0]], "start": 1, "end": 1})"), 2), Error);
  CHECK_THROWS_AS(event_from_json(nlohmann::json::parse(R"({"kind": "presence", "cells": [[5]], "start": 1, "end": 1})"), 2), Error);
  CHECK_THROWS_AS(event_from_json(nlohmann::json::parse(R"({"kind": "presence", "start": 1})"), 2), Error);
}
