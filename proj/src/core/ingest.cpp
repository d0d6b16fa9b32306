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

#include "ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "error.hpp"

namespace stp {
namespace {

struct Sample {
  double t;
  CellIndex cell;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  require(ec == std::errc() && ptr == end && std::isfinite(v), ErrorCode::ParseError,
          where + ": cannot parse '" + s + "' as a number");
  return v;
}

std::vector<Sample> resample(const std::vector<Sample>& rows, double step) {
  if (step <= 0.0 || rows.empty()) return rows;
  std::vector<Sample> out;
  const double t0 = rows.front().t;
  std::size_t j = 0;
  for (std::size_t k = 0;; ++k) {
    const double boundary = t0 + static_cast<double>(k) * step;
    if (boundary > rows.back().t) break;
    while (j + 1 < rows.size() &&
           std::abs(rows[j + 1].t - boundary) < std::abs(rows[j].t - boundary)) {
      ++j;
    }
    out.push_back(rows[j]);
  }
  return out;
}

}  // namespace

IngestResult parse_trajectories(std::istream& in, const GridMap& map, double resample_seconds,
                                const std::string& source_name) {
  require(resample_seconds >= 0.0, ErrorCode::InvalidArgument,
          "resample_seconds must be >= 0");
  IngestResult result;
  std::string line;
  std::size_t lineno = 0;
  bool by_cell = false;
  bool have_header = false;
  std::vector<Sample> current;

  auto flush = [&] {
    const auto rows = resample(current, resample_seconds);
    if (!rows.empty()) {
      Trajectory traj;
      for (const auto& s : rows) traj.cells.push_back(s.cell);
      result.trajectories.push_back(std::move(traj));
    }
    current.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source_name + ":" + std::to_string(lineno);
    const std::string text = trim(line);
    if (text.empty()) {
      flush();
      continue;
    }
    const auto fields = split(text);
    if (!have_header) {
      if (fields == std::vector<std::string>{"t", "cell"}) {
        by_cell = true;
      } else if (fields != std::vector<std::string>{"t", "lat", "lon"}) {
        fail(ErrorCode::ParseError, where + ": expected header 't,lat,lon' or 't,cell'");
      }
      have_header = true;
      continue;
    }
    require(fields.size() == (by_cell ? 2u : 3u), ErrorCode::ParseError,
            where + ": wrong number of fields");
    ++result.rows_read;
    const double t = parse_number(fields[0], where);
    require(current.empty() || t >= current.back().t, ErrorCode::ParseError,
            where + ": timestamps must not decrease within a trajectory");
    if (by_cell) {
      const double c = parse_number(fields[1], where);
      require(c >= 0.0 && c == std::floor(c), ErrorCode::ParseError,
              where + ": cell must be a non-negative integer");
      if (c >= static_cast<double>(map.size())) {
        ++result.dropped_rows;
        continue;
      }
      current.push_back({t, CellIndex{static_cast<std::size_t>(c)}});
    } else {
      const double lat = parse_number(fields[1], where);
      const double lon = parse_number(fields[2], where);
      try {
        current.push_back({t, map.locate({lat, lon})});
      } catch (const Error& e) {
        if (e.code() != ErrorCode::OutOfBounds) throw;
        ++result.dropped_rows;
      }
    }
  }
  require(have_header, ErrorCode::ParseError, source_name + ": empty file");
  flush();
  require(!result.trajectories.empty(), ErrorCode::EmptyAfterFilter,
          source_name + ": no trajectory rows inside the grid");
  return result;
}

IngestResult ingest_trajectories(const std::filesystem::path& path, const GridMap& map,
                                 double resample_seconds) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::IoError, "cannot open " + path.string());
  return parse_trajectories(in, map, resample_seconds, path.string());
}

}  // namespace stp
