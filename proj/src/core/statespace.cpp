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

#include "statespace.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "error.hpp"

namespace stp {
namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kMetersPerDegree = kEarthRadiusM * std::numbers::pi / 180.0;

}  // namespace

GridMap::GridMap(std::size_t rows, std::size_t cols, double cell_size_m,
                 GeoPoint origin)
    : rows_(rows),
      cols_(cols),
      cell_size_m_(cell_size_m),
      origin_(origin),
      meters_per_deg_lat_(kMetersPerDegree),
      meters_per_deg_lon_(kMetersPerDegree *
                          std::cos(origin.lat_deg * std::numbers::pi / 180.0)) {
  require(rows > 0 && cols > 0, ErrorCode::InvalidArgument,
          "grid must have at least one row and one column");
  require(cell_size_m > 0.0 && std::isfinite(cell_size_m),
          ErrorCode::InvalidArgument, "cell_size_m must be positive");
  require(std::abs(origin.lat_deg) < 90.0, ErrorCode::InvalidArgument,
          "origin latitude must lie strictly between the poles");
}

CellIndex GridMap::index(std::size_t row, std::size_t col) const {
  require(row < rows_ && col < cols_, ErrorCode::OutOfBounds,
          "row/col outside grid");
  return CellIndex{row * cols_ + col};
}

std::pair<std::size_t, std::size_t> GridMap::row_col(CellIndex c) const {
  require(valid(c), ErrorCode::OutOfBounds,
          "cell index " + std::to_string(c.value) + " outside grid");
  return {c.value / cols_, c.value % cols_};
}

LocalPoint GridMap::project(GeoPoint p) const noexcept {
  return {(p.lon_deg - origin_.lon_deg) * meters_per_deg_lon_,
          (p.lat_deg - origin_.lat_deg) * meters_per_deg_lat_};
}

GeoPoint GridMap::unproject(LocalPoint p) const noexcept {
  return {origin_.lat_deg + p.y_m / meters_per_deg_lat_,
          origin_.lon_deg + p.x_m / meters_per_deg_lon_};
}

LocalPoint GridMap::cell_center_local(CellIndex c) const {
  const auto [row, col] = row_col(c);
  return {(static_cast<double>(col) + 0.5) * cell_size_m_,
          (static_cast<double>(row) + 0.5) * cell_size_m_};
}

GeoPoint GridMap::cell_center(CellIndex c) const {
  return unproject(cell_center_local(c));
}

CellIndex GridMap::locate(GeoPoint p) const { return locate_local(project(p)); }

CellIndex GridMap::locate_local(LocalPoint p) const {
  const double width = static_cast<double>(cols_) * cell_size_m_;
  const double height = static_cast<double>(rows_) * cell_size_m_;
  if (!(p.x_m >= 0.0 && p.x_m <= width && p.y_m >= 0.0 && p.y_m <= height)) {
    fail(ErrorCode::OutOfBounds, "point (" + std::to_string(p.x_m) + " m, " +
                                     std::to_string(p.y_m) +
                                     " m) outside grid");
  }
  auto col = static_cast<std::size_t>(std::floor(p.x_m / cell_size_m_));
  auto row = static_cast<std::size_t>(std::floor(p.y_m / cell_size_m_));
  if (col >= cols_) col = cols_ - 1;
  if (row >= rows_) row = rows_ - 1;
  return CellIndex{row * cols_ + col};
}

double GridMap::euclidean_km(CellIndex a, CellIndex b) const {
  const auto [ra, ca] = row_col(a);
  const auto [rb, cb] = row_col(b);
  const double dr = static_cast<double>(ra) - static_cast<double>(rb);
  const double dc = static_cast<double>(ca) - static_cast<double>(cb);
  return std::hypot(dr, dc) * cell_size_km();
}

}  // namespace stp
