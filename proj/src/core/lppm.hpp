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
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>

#include <Eigen/Core>

#include "events.hpp"
#include "markov.hpp"
#include "sampling.hpp"
#include "statespace.hpp"
#include "twoworld.hpp"

namespace stp {

// Row i is the output distribution Pr(o | u = s_i).
class EmissionMatrix {
 public:
  explicit EmissionMatrix(Eigen::MatrixXd probs);

  std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.rows()); }
  const Eigen::MatrixXd& probs() const noexcept { return probs_; }
  EmissionColumn column(CellIndex observed) const;

 private:
  Eigen::MatrixXd probs_;
};

struct PlanarLaplaceSpec {
  double alpha = 0.2;  // per km
  std::size_t subsamples = 3;
};

// Discretized planar Laplace. Entry (i, j) is proportional to the mean over
// subsample points p of cell j of exp(-alpha * d(center_i, p) / 2). Half of
// the budget goes to the kernel and half to the row normalizer, which keeps
// the discrete matrix alpha-geo-indistinguishable for any subsample count.
EmissionMatrix planar_laplace_matrix(const GridMap& map, const PlanarLaplaceSpec& spec);

EmissionMatrix uniform_matrix(std::size_t m);

CellIndex sample_output(const EmissionMatrix& matrix, CellIndex true_cell, Rng& rng);
CellIndex sample_output(const EmissionMatrix& matrix, CellIndex true_cell, std::uint64_t seed);

struct DeltaLocationSet {
  double delta = 0.0;
  RegionMask set;
};

// Smallest set with prior mass >= 1 - delta, taken greedily by decreasing
// probability with ties going to the lower index.
DeltaLocationSet delta_set(const Distribution& prior, double delta);

// Keeps only outputs inside the set. Rows of states inside the set are
// renormalized; rows of states outside it (or with no mass left) become
// uniform over the set.
EmissionMatrix restrict(const EmissionMatrix& matrix, const DeltaLocationSet& set);

// Bayes update p+[i] ∝ column[i] * p-[i]. ZeroLikelihood when the
// observation is impossible under prior_minus.
Distribution posterior(const Distribution& prior_minus, const EmissionColumn& column);

// Planar Laplace matrices keyed by alpha. Safe to share between threads.
class PlanarLaplaceCache {
 public:
  PlanarLaplaceCache(GridMap map, std::size_t subsamples);

  std::shared_ptr<const EmissionMatrix> get(double alpha);
  const GridMap& map() const noexcept { return map_; }

 private:
  GridMap map_;
  std::size_t subsamples_;
  std::mutex mu_;
  std::map<double, std::shared_ptr<const EmissionMatrix>> entries_;
};

}  // namespace stp
