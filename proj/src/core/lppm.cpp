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

#include "lppm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "error.hpp"

namespace stp {

EmissionMatrix::EmissionMatrix(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
  require(probs_.rows() == probs_.cols() && probs_.rows() > 0, ErrorCode::InvalidArgument,
          "emission matrix must be square and non-empty");
  check_row_stochastic(probs_);
}

EmissionColumn EmissionMatrix::column(CellIndex observed) const {
  require(observed.value < size(), ErrorCode::OutOfBounds, "observation outside the grid");
  return {probs_.col(static_cast<Eigen::Index>(observed.value))};
}

EmissionMatrix planar_laplace_matrix(const GridMap& map, const PlanarLaplaceSpec& spec) {
  require(spec.alpha > 0.0 && std::isfinite(spec.alpha), ErrorCode::InvalidArgument,
          "alpha must be positive");
  require(spec.subsamples >= 1, ErrorCode::InvalidArgument, "subsamples must be >= 1");
  const auto rows = static_cast<long>(map.rows());
  const auto cols = static_cast<long>(map.cols());
  const std::size_t n = spec.subsamples;
  const double cell_km = map.cell_size_km();

  std::vector<double> frac(n);
  for (std::size_t k = 0; k < n; ++k) {
    frac[k] = (static_cast<double>(k) + 0.5) / static_cast<double>(n) - 0.5;
  }
  // Kernel mass of a cell at offset (dr, dc) from the source cell.
  const long w = 2 * cols - 1;
  std::vector<double> table(static_cast<std::size_t>((2 * rows - 1) * w));
  for (long dr = -(rows - 1); dr <= rows - 1; ++dr) {
    for (long dc = -(cols - 1); dc <= cols - 1; ++dc) {
      double acc = 0.0;
      for (double fy : frac) {
        for (double fx : frac) {
          const double d = cell_km * std::hypot(static_cast<double>(dr) + fy,
                                                static_cast<double>(dc) + fx);
          acc += std::exp(-0.5 * spec.alpha * d);
        }
      }
      table[static_cast<std::size_t>((dr + rows - 1) * w + (dc + cols - 1))] =
          acc / static_cast<double>(n * n);
    }
  }

  const auto m = static_cast<Eigen::Index>(map.size());
  Eigen::MatrixXd probs(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const long ri = i / cols, ci = i % cols;
    for (Eigen::Index j = 0; j < m; ++j) {
      const long rj = j / cols, cj = j % cols;
      probs(i, j) = table[static_cast<std::size_t>((rj - ri + rows - 1) * w + (cj - ci + cols - 1))];
    }
    probs.row(i) /= probs.row(i).sum();
  }
  return EmissionMatrix(std::move(probs));
}

EmissionMatrix uniform_matrix(std::size_t m) {
  require(m >= 1, ErrorCode::InvalidArgument, "m must be >= 1");
  const auto n = static_cast<Eigen::Index>(m);
  return EmissionMatrix(Eigen::MatrixXd::Constant(n, n, 1.0 / static_cast<double>(m)));
}

CellIndex sample_output(const EmissionMatrix& matrix, CellIndex true_cell, Rng& rng) {
  require(true_cell.value < matrix.size(), ErrorCode::OutOfBounds, "true cell outside the grid");
  return {sample_index(matrix.probs().row(static_cast<Eigen::Index>(true_cell.value)), rng)};
}

CellIndex sample_output(const EmissionMatrix& matrix, CellIndex true_cell, std::uint64_t seed) {
  Rng rng(seed);
  return sample_output(matrix, true_cell, rng);
}

DeltaLocationSet delta_set(const Distribution& prior, double delta) {
  require(delta >= 0.0 && delta < 1.0, ErrorCode::InvalidArgument, "delta must lie in [0, 1)");
  const std::size_t m = prior.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return prior[a] > prior[b]; });
  std::vector<std::uint8_t> bits(m, 0);
  const double target = 1.0 - delta - 1e-12;
  double cum = 0.0;
  for (std::size_t i : order) {
    if (cum >= target) break;
    bits[i] = 1;
    cum += prior[i];
  }
  return {delta, RegionMask(std::move(bits))};
}

EmissionMatrix restrict(const EmissionMatrix& matrix, const DeltaLocationSet& set) {
  const auto m = static_cast<Eigen::Index>(matrix.size());
  require(set.set.size() == matrix.size(), ErrorCode::InvalidArgument,
          "location set size does not match the matrix");
  require(set.set.count() > 0, ErrorCode::EmptySet, "delta-location set is empty");
  const Eigen::VectorXd inside = set.set.as_vector();
  const Eigen::RowVectorXd uniform = inside.transpose() / inside.sum();
  Eigen::MatrixXd probs = matrix.probs() * inside.asDiagonal();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double mass = probs.row(i).sum();
    if (!set.set.contains(static_cast<std::size_t>(i)) || !(mass > 0.0)) {
      probs.row(i) = uniform;
    } else {
      probs.row(i) /= mass;
    }
  }
  return EmissionMatrix(std::move(probs));
}

Distribution posterior(const Distribution& prior_minus, const EmissionColumn& column) {
  check_emission(column, prior_minus.size());
  Eigen::VectorXd p = prior_minus.probs().cwiseProduct(column.probs);
  const double total = p.sum();
  require(total > 0.0, ErrorCode::ZeroLikelihood,
          "observation has zero probability under the prior");
  p /= total;
  return Distribution(std::move(p));
}

PlanarLaplaceCache::PlanarLaplaceCache(GridMap map, std::size_t subsamples)
    : map_(std::move(map)), subsamples_(subsamples) {}

std::shared_ptr<const EmissionMatrix> PlanarLaplaceCache::get(double alpha) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(alpha);
    if (it != entries_.end()) return it->second;
  }
  auto built = std::make_shared<const EmissionMatrix>(
      planar_laplace_matrix(map_, {alpha, subsamples_}));
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.emplace(alpha, std::move(built)).first->second;
}

}  // namespace stp
