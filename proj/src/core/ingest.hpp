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

#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "markov.hpp"
#include "statespace.hpp"

namespace stp {

struct IngestResult {
  std::vector<Trajectory> trajectories;
  std::size_t rows_read = 0;
  // Rows outside the grid (or naming a cell index >= m).
  std::size_t dropped_rows = 0;
};

// CSV with header `t,lat,lon` or `t,cell`; a blank line starts a new
// trajectory. t is in seconds. With resample_seconds > 0 each trajectory is
// reduced to one sample per step boundary t0 + k * resample_seconds, taking
// the row nearest to the boundary (earlier row on ties). ParseError names
// the offending line; EmptyAfterFilter when nothing survives.
IngestResult parse_trajectories(std::istream& in, const GridMap& map, double resample_seconds,
                                const std::string& source_name = "<input>");
IngestResult ingest_trajectories(const std::filesystem::path& path, const GridMap& map,
                                 double resample_seconds = 0.0);

}  // namespace stp
