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
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "events.hpp"
#include "markov.hpp"

namespace stp {

// Likelihood of one released observation: entry i = Pr(o_t | u_t = s_i).
// Not a distribution; entries only need to lie in [0, 1].
struct EmissionColumn {
  Eigen::VectorXd probs;

  static EmissionColumn ones(std::size_t m) {
    return {Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m))};
  }
};

void check_emission(const EmissionColumn& col, std::size_t m);

// Block layout of an augmented 2m x 2m transition. The first m coordinates
// are the world where the event is false, the last m the world where it is
// true. M is the base transition and S = diag(mask).
enum class BlockKind {
  Separate,  // [[M, 0], [0, M]]
  Enter,     // [[M - MS, MS], [0, M]]: false -> true on landing in the mask
  Stay,      // [[M, 0], [M - MS, MS]]: true world survives only inside the mask
};

// Which world a joint probability is taken over.
enum class World { EventFalse, EventTrue };

// Two-world transition sequence for one PRESENCE/PATTERN event. Index t in
// [1, horizon) is the transition from timestamp t to t + 1. Index 0 is the
// lift applied to the initial distribution [pi, 0]: the identity unless the
// window starts at t = 1, where it routes initial mass inside the first
// region into the true world.
class AugmentedChain {
 public:
  AugmentedChain(Event event, std::shared_ptr<const MarkovModel> model,
                 std::size_t horizon);

  const Event& event() const noexcept { return event_; }
  const MarkovModel& base() const noexcept { return *model_; }
  std::size_t states() const noexcept { return m_; }
  std::size_t horizon() const noexcept { return horizon_; }

  BlockKind kind_at(std::size_t t) const;
  // Base matrix at step t; nullptr stands for the identity (t = 0).
  const Eigen::MatrixXd* base_at(std::size_t t) const;
  const Eigen::VectorXd& mask_at(std::size_t t) const;

  Eigen::MatrixXd dense(std::size_t t) const;

  // row * M_t
  Eigen::RowVectorXd apply_left(std::size_t t, const Eigen::RowVectorXd& row) const;
  // M_t * col
  Eigen::VectorXd apply_right(std::size_t t, const Eigen::VectorXd& col) const;
  // [X, Y] <- [X, Y] * M_t for an m x 2m block row. y_zero skips the
  // products of an all-zero Y and is updated on return.
  void apply_left_block(std::size_t t, Eigen::MatrixXd& x, Eigen::MatrixXd& y,
                        bool& y_zero) const;

  // prod_{i=t}^{end-1} M_i [0, 1]^T for t in [0, end]; suffix(0) is the
  // event-probability vector a.
  const Eigen::VectorXd& suffix(std::size_t t) const;
  const Eigen::VectorXd& a() const { return suffix(0); }

 private:
  Event event_;
  std::shared_ptr<const MarkovModel> model_;
  std::size_t m_;
  std::size_t horizon_;
  std::vector<BlockKind> kinds_;
  std::vector<Eigen::VectorXd> masks_;
  std::vector<Eigen::VectorXd> suffix_;
};

// Probability carried as mantissa * exp(log_scale) so long horizons do not
// underflow.
struct ScaledProbability {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double value() const;
  double log() const;
};

double prior(const AugmentedChain& chain, const Distribution& pi);

// Pr(Event, o_1..o_t) with t = emissions.size() <= end (HorizonExceeded
// otherwise). The trailing transitions up to `end` are applied as
// vector-matrix products.
ScaledProbability joint_before(const AugmentedChain& chain, const Distribution& pi,
                               std::span<const EmissionColumn> emissions,
                               World world = World::EventTrue);

// Pr(Event, o_1..o_t) for t > end, combining the forward mass at `end`
// with the backward likelihood of the later observations.
ScaledProbability joint_after(const AugmentedChain& chain, const Distribution& pi,
                              std::span<const EmissionColumn> emissions,
                              World world = World::EventTrue);

// Dispatches to joint_before / joint_after by the prefix length.
ScaledProbability joint(const AugmentedChain& chain, const Distribution& pi,
                        std::span<const EmissionColumn> emissions,
                        World world = World::EventTrue);

// Running state of the release check for one event. b and c are the rows of
// the check vectors reachable from an initial distribution [pi, 0] (the
// projection the release conditions use), stored up to the common factor
// exp(log_scale). The accumulators keep the same rows: A = [X, Y] (m x 2m),
// and B as its m x m diagonal block (after the window both worlds evolve
// with the same block-diagonal transition).
class CheckVectors {
 public:
  explicit CheckVectors(const AugmentedChain& chain);

  std::size_t t() const noexcept { return t_; }
  // Full 2m vector a and its projection onto the initial (false) world.
  const Eigen::VectorXd& a_full() const noexcept { return a_; }
  Eigen::VectorXd a() const { return a_.head(static_cast<Eigen::Index>(m_)); }
  const Eigen::VectorXd& b() const noexcept { return b_; }
  const Eigen::VectorXd& c() const noexcept { return c_; }
  double log_scale() const noexcept { return log_bc_; }

  const Eigen::MatrixXd& acc_x() const noexcept { return x_; }
  const Eigen::MatrixXd& acc_y() const noexcept { return y_; }
  const Eigen::MatrixXd& acc_b() const noexcept { return bh_; }

  // b, c for a candidate observation at t + 1 without committing it.
  struct Candidate {
    std::size_t t = 0;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    double log_scale = 0.0;
  };
  Candidate evaluate(const AugmentedChain& chain, const EmissionColumn& emission) const;

  friend CheckVectors advance(CheckVectors cv, const AugmentedChain& chain,
                              const EmissionColumn& emission);

 private:
  std::size_t m_;
  std::size_t end_;
  std::size_t t_ = 0;
  Eigen::VectorXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd c_;
  double log_bc_ = 0.0;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd y_;
  bool y_zero_ = true;
  double log_a_ = 0.0;
  Eigen::MatrixXd bh_;
  double log_b_ = 0.0;
};

// Folds one released observation into the check state: computes b and c at
// t + 1 and updates A (inside/before the window) or B (after it).
CheckVectors advance(CheckVectors cv, const AugmentedChain& chain,
                     const EmissionColumn& emission);
// Same, but rejects an observation whose timestamp is not t() + 1
// (OutOfOrder).
CheckVectors advance(CheckVectors cv, const AugmentedChain& chain, std::size_t t,
                     const EmissionColumn& emission);

}  // namespace stp
