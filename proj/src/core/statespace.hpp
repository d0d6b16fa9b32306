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

#include <compare>
#include <cstddef>
#include <utility>

namespace stp {

struct CellIndex {
  std::size_t value = 0;

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct GeoPoint {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

// Planar offset from the grid origin, in meters (x east, y north).
struct LocalPoint {
  double x_m = 0.0;
  double y_m = 0.0;
};

// Rectangular grid of square cells anchored at its south-west corner.
// Cells are numbered row-major starting from the south-west cell, so cell
// index = row * cols + col with row 0 the southernmost row.
//
// Geographic coordinates are mapped onto the plane with an equirectangular
// projection about the origin; all cell geometry (centers, distances) lives
// in that plane.
class GridMap {
 public:
  GridMap(std::size_t rows, std::size_t cols, double cell_size_m,
          GeoPoint origin = {});

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return rows_ * cols_; }
  double cell_size_m() const noexcept { return cell_size_m_; }
  double cell_size_km() const noexcept { return cell_size_m_ / 1000.0; }
  GeoPoint origin() const noexcept { return origin_; }

  bool valid(CellIndex c) const noexcept { return c.value < size(); }
  CellIndex index(std::size_t row, std::size_t col) const;
  std::pair<std::size_t, std::size_t> row_col(CellIndex c) const;

  LocalPoint project(GeoPoint p) const noexcept;
  GeoPoint unproject(LocalPoint p) const noexcept;

  LocalPoint cell_center_local(CellIndex c) const;
  GeoPoint cell_center(CellIndex c) const;

  // Throws OutOfBounds when the point lies outside the grid. Points on an
  // interior edge belong to the cell with the larger row/col index; points on
  // the outer north/east edge belong to the last row/col.
  CellIndex locate(GeoPoint p) const;
  CellIndex locate_local(LocalPoint p) const;

  double euclidean_km(CellIndex a, CellIndex b) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  double cell_size_m_;
  GeoPoint origin_;
  double meters_per_deg_lat_;
  double meters_per_deg_lon_;
};

// Free-function spellings used throughout the library.
inline CellIndex locate(const GridMap& map, double lat_deg, double lon_deg) {
  return map.locate({lat_deg, lon_deg});
}

inline double euclidean_km(const GridMap& map, CellIndex a, CellIndex b) {
  return map.euclidean_km(a, b);
}

}  // namespace stp
