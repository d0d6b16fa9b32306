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
#include <span>
#include <vector>

#include <Eigen/Core>

#include "statespace.hpp"

namespace stp {

inline constexpr double kStochasticTol = 1e-9;

// Probability vector over the m grid cells.
class Distribution {
 public:
  explicit Distribution(Eigen::VectorXd probs);

  static Distribution uniform(std::size_t m);
  static Distribution point_mass(std::size_t m, CellIndex cell);

  const Eigen::VectorXd& probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }
  double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

 private:
  Eigen::VectorXd probs_;
};

struct Trajectory {
  std::vector<CellIndex> cells;

  std::size_t size() const noexcept { return cells.size(); }
  // Timestamps are 1-based.
  CellIndex at(std::size_t t) const { return cells.at(t - 1); }
};

// First-order mobility model. A single matrix is used for every step; a
// sequence holds one matrix per transition t -> t+1, t = 1, 2, ...
class MarkovModel {
 public:
  explicit MarkovModel(Eigen::MatrixXd transition, double smoothing = 0.0);
  explicit MarkovModel(std::vector<Eigen::MatrixXd> transitions,
                       double smoothing = 0.0);

  std::size_t states() const noexcept { return m_; }
  bool time_varying() const noexcept { return transitions_.size() > 1; }
  double smoothing() const noexcept { return smoothing_; }
  const std::vector<Eigen::MatrixXd>& transitions() const noexcept {
    return transitions_;
  }

  // Matrix for the transition from timestamp t to t + 1 (t >= 1).
  const Eigen::MatrixXd& at(std::size_t t) const;

  // Largest horizon T the model can describe (unbounded when homogeneous).
  std::size_t max_horizon() const noexcept;

 private:
  std::vector<Eigen::MatrixXd> transitions_;
  double smoothing_;
  std::size_t m_;
};

void check_row_stochastic(const Eigen::MatrixXd& mat, double tol = kStochasticTol);

// Maximum-likelihood transition counts with additive smoothing.
MarkovModel train(std::span<const Trajectory> trajectories, std::size_t m,
                  double smoothing);

// Transition probability proportional to a 2-D Gaussian kernel over the
// distance (in cell units) between cell centers.
MarkovModel synth_gaussian(std::size_t rows, std::size_t cols, double sigma);

Trajectory sample_trajectory(const MarkovModel& model, const Distribution& pi,
                             std::size_t horizon, std::uint64_t seed);

// pi * M_1 * ... * M_steps.
Distribution propagate(const Distribution& pi, const MarkovModel& model,
                       std::size_t steps);

}  // namespace stp
