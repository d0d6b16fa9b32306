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

#include "markov.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"
#include "sampling.hpp"

namespace stp {

Distribution::Distribution(Eigen::VectorXd probs) : probs_(std::move(probs)) {
  require(probs_.size() > 0, ErrorCode::InvalidArgument, "empty distribution");
  require((probs_.array() >= 0.0).all() && probs_.allFinite(),
          ErrorCode::InvalidArgument, "distribution has negative entries");
  require(std::abs(probs_.sum() - 1.0) <= kStochasticTol,
          ErrorCode::InvalidArgument,
          "distribution sums to " + std::to_string(probs_.sum()));
}

Distribution Distribution::uniform(std::size_t m) {
  return Distribution(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(m),
                                                1.0 / static_cast<double>(m)));
}

Distribution Distribution::point_mass(std::size_t m, CellIndex cell) {
  require(cell.value < m, ErrorCode::OutOfBounds, "point mass outside domain");
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  p(static_cast<Eigen::Index>(cell.value)) = 1.0;
  return Distribution(std::move(p));
}

void check_row_stochastic(const Eigen::MatrixXd& mat, double tol) {
  require(mat.rows() == mat.cols() && mat.rows() > 0,
          ErrorCode::InvalidArgument, "transition matrix must be square");
  require(mat.allFinite() && (mat.array() >= 0.0).all() &&
              (mat.array() <= 1.0 + tol).all(),
          ErrorCode::InvalidArgument, "transition entries must lie in [0,1]");
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    const double s = mat.row(i).sum();
    require(std::abs(s - 1.0) <= tol, ErrorCode::InvalidArgument,
            "row " + std::to_string(i) + " sums to " + std::to_string(s));
  }
}

MarkovModel::MarkovModel(Eigen::MatrixXd transition, double smoothing)
    : MarkovModel(std::vector<Eigen::MatrixXd>{std::move(transition)},
                  smoothing) {}

MarkovModel::MarkovModel(std::vector<Eigen::MatrixXd> transitions,
                         double smoothing)
    : transitions_(std::move(transitions)), smoothing_(smoothing), m_(0) {
  require(!transitions_.empty(), ErrorCode::InvalidArgument,
          "model needs at least one transition matrix");
  require(smoothing >= 0.0, ErrorCode::InvalidArgument,
          "smoothing must be nonnegative");
  m_ = static_cast<std::size_t>(transitions_.front().rows());
  for (const auto& mat : transitions_) {
    require(static_cast<std::size_t>(mat.rows()) == m_,
            ErrorCode::InvalidArgument, "transition matrices differ in size");
    check_row_stochastic(mat);
  }
}

const Eigen::MatrixXd& MarkovModel::at(std::size_t t) const {
  require(t >= 1, ErrorCode::TimestampOutOfRange, "transition index starts at 1");
  if (transitions_.size() == 1) return transitions_.front();
  require(t <= transitions_.size(), ErrorCode::TimestampOutOfRange,
          "no transition matrix for t=" + std::to_string(t));
  return transitions_[t - 1];
}

std::size_t MarkovModel::max_horizon() const noexcept {
  if (transitions_.size() == 1) return std::numeric_limits<std::size_t>::max();
  return transitions_.size() + 1;
}

MarkovModel train(std::span<const Trajectory> trajectories, std::size_t m,
                  double smoothing) {
  require(m > 0, ErrorCode::InvalidArgument, "state count must be positive");
  require(smoothing >= 0.0, ErrorCode::InvalidArgument,
          "smoothing must be nonnegative");
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  std::size_t observed = 0;
  for (const auto& traj : trajectories) {
    for (std::size_t k = 0; k < traj.cells.size(); ++k) {
      require(traj.cells[k].value < m, ErrorCode::OutOfBounds,
              "trajectory cell outside state space");
      if (k == 0) continue;
      counts(static_cast<Eigen::Index>(traj.cells[k - 1].value),
             static_cast<Eigen::Index>(traj.cells[k].value)) += 1.0;
      ++observed;
    }
  }
  require(observed > 0 || smoothing > 0.0, ErrorCode::EmptyCorpus,
          "no transitions observed and smoothing is zero");

  Eigen::MatrixXd mat(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double row_total = counts.row(i).sum() + static_cast<double>(m) * smoothing;
    if (row_total <= 0.0) {
      mat.row(i).setConstant(1.0 / static_cast<double>(m));
    } else {
      mat.row(i) = (counts.row(i).array() + smoothing) / row_total;
    }
  }
  return MarkovModel(std::move(mat), smoothing);
}

MarkovModel synth_gaussian(std::size_t rows, std::size_t cols, double sigma) {
  require(sigma > 0.0 && std::isfinite(sigma), ErrorCode::InvalidArgument,
          "sigma must be positive");
  require(rows > 0 && cols > 0, ErrorCode::InvalidArgument, "empty grid");
  const std::size_t m = rows * cols;
  const auto n = static_cast<Eigen::Index>(m);
  const double inv_two_var = 1.0 / (2.0 * sigma * sigma);
  Eigen::MatrixXd mat(n, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double ri = static_cast<double>(i / cols), ci = static_cast<double>(i % cols);
    for (std::size_t j = 0; j < m; ++j) {
      const double dr = ri - static_cast<double>(j / cols);
      const double dc = ci - static_cast<double>(j % cols);
      mat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::exp(-(dr * dr + dc * dc) * inv_two_var);
    }
    // The self term is exp(0) = 1, so the row sum never vanishes.
    mat.row(static_cast<Eigen::Index>(i)) /= mat.row(static_cast<Eigen::Index>(i)).sum();
  }
  return MarkovModel(std::move(mat));
}

Trajectory sample_trajectory(const MarkovModel& model, const Distribution& pi,
                             std::size_t horizon, std::uint64_t seed) {
  require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
  require(pi.size() == model.states(), ErrorCode::InvalidArgument,
          "initial distribution size mismatch");
  Rng rng(seed);
  Trajectory traj;
  traj.cells.reserve(horizon);
  traj.cells.push_back(CellIndex{sample_index(pi.probs(), rng)});
  for (std::size_t t = 1; t < horizon; ++t) {
    const auto prev = static_cast<Eigen::Index>(traj.cells.back().value);
    traj.cells.push_back(CellIndex{sample_index(model.at(t).row(prev), rng)});
  }
  return traj;
}

Distribution propagate(const Distribution& pi, const MarkovModel& model,
                       std::size_t steps) {
  require(pi.size() == model.states(), ErrorCode::InvalidArgument,
          "initial distribution size mismatch");
  Eigen::RowVectorXd p = pi.probs().transpose();
  for (std::size_t t = 1; t <= steps; ++t) p = p * model.at(t);
  // Renormalize away rounding drift so the result stays a valid Distribution.
  p /= p.sum();
  return Distribution(p.transpose());
}

}  // namespace stp
