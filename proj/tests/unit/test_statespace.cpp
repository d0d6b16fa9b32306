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

#include "error.hpp"
#include "statespace.hpp"

using namespace stp;

TEST_CASE("locate maps points to cells") {
  const GridMap map(2, 2, 1000.0, {0.0, 0.0});
  CHECK(map.locate(map.unproject({100.0, 100.0})).value == 0);
  CHECK(map.locate(map.cell_center(CellIndex{3})).value == 3);
  CHECK(map.locate(map.cell_center(CellIndex{1})).value == 1);
  CHECK(map.locate_local({1500.0, 200.0}).value == 1);
  CHECK(map.locate_local({200.0, 1500.0}).value == 2);
}

TEST_CASE("locate rejects points off the grid") {
  const GridMap map(2, 2, 1000.0, {0.0, 0.0});
  CHECK_THROWS_AS(map.locate(map.unproject({2001.0, 500.0})), Error);
  try {
    map.locate_local({-1.0, 10.0});
    FAIL("expected OutOfBounds");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfBounds);
  }
}

TEST_CASE("euclidean distance between cell centers") {
  const GridMap map(3, 3, 1000.0);
  CHECK(map.euclidean_km(CellIndex{4}, CellIndex{4}) == 0.0);
  CHECK(map.euclidean_km(CellIndex{0}, CellIndex{1}) == doctest::Approx(1.0));
  CHECK(map.euclidean_km(CellIndex{0}, CellIndex{4}) == doctest::Approx(1.41421).epsilon(1e-3));
}

TEST_CASE("distance is symmetric on a 20x20 grid") {
  const GridMap map(20, 20, 250.0, {39.9, 116.3});
  for (std::size_t a = 0; a < map.size(); a += 7) {
    for (std::size_t b = 0; b < map.size(); b += 3) {
      CHECK(map.euclidean_km(CellIndex{a}, CellIndex{b}) ==
            map.euclidean_km(CellIndex{b}, CellIndex{a}));
    }
  }
}

TEST_CASE("cell centers round trip through geographic coordinates") {
  const GridMap map(5, 4, 300.0, {39.9, 116.3});
  for (std::size_t c = 0; c < map.size(); ++c) {
    CHECK(map.locate(map.cell_center(CellIndex{c})).value == c);
  }
}
