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

#include "twoworld.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace stp {
namespace {

Eigen::VectorXd duplicate(const Eigen::VectorXd& v) {
  Eigen::VectorXd out(2 * v.size());
  out << v, v;
  return out;
}

Eigen::VectorXd world_mask(std::size_t m, World world) {
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::VectorXd mask = Eigen::VectorXd::Zero(2 * n);
  if (world == World::EventTrue) {
    mask.tail(n).setOnes();
  } else {
    mask.head(n).setOnes();
  }
  return mask;
}

// Divides v by its sum and folds the factor into log_scale. Returns false
// when all mass vanished.
template <typename V>
bool rescale(V& v, double& log_scale) {
  const double s = v.sum();
  if (!(s > 0.0)) return false;
  v /= s;
  log_scale += std::log(s);
  return true;
}

double max_abs(const Eigen::MatrixXd& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

}  // namespace

void check_emission(const EmissionColumn& col, std::size_t m) {
  require(static_cast<std::size_t>(col.probs.size()) == m, ErrorCode::InvalidArgument,
          "emission column has " + std::to_string(col.probs.size()) + " entries, expected " +
              std::to_string(m));
  require(col.probs.allFinite() && (col.probs.array() >= 0.0).all() &&
              (col.probs.array() <= 1.0 + 1e-12).all(),
          ErrorCode::InvalidArgument, "emission entries must lie in [0, 1]");
}

AugmentedChain::AugmentedChain(Event event, std::shared_ptr<const MarkovModel> model,
                               std::size_t horizon)
    : event_(std::move(event)), model_(std::move(model)), m_(0), horizon_(horizon) {
  require(model_ != nullptr, ErrorCode::InvalidArgument, "null model");
  m_ = model_->states();
  require(horizon_ >= 1, ErrorCode::WindowOutOfRange, "horizon must be >= 1");
  event_.validate(m_, horizon_);
  require(horizon_ <= model_->max_horizon(), ErrorCode::WindowOutOfRange,
          "model has too few transition matrices for horizon " + std::to_string(horizon_));

  const std::size_t start = event_.start();
  const std::size_t end = event_.end();
  kinds_.assign(horizon_, BlockKind::Separate);
  masks_.assign(horizon_, Eigen::VectorXd());
  for (std::size_t t = 0; t < horizon_; ++t) {
    if (t + 1 == start) {
      kinds_[t] = BlockKind::Enter;
      masks_[t] = event_.region_at(start).as_vector();
    } else if (t >= start && t < end) {
      if (event_.kind() == EventKind::Presence) {
        kinds_[t] = BlockKind::Enter;
        masks_[t] = event_.regions().front().as_vector();
      } else {
        kinds_[t] = BlockKind::Stay;
        masks_[t] = event_.region_at(t + 1).as_vector();
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(m_);
  suffix_.resize(end + 1);
  suffix_[end] = Eigen::VectorXd::Zero(2 * n);
  suffix_[end].tail(n).setOnes();
  for (std::size_t t = end; t-- > 0;) suffix_[t] = apply_right(t, suffix_[t + 1]);
}

BlockKind AugmentedChain::kind_at(std::size_t t) const {
  require(t < horizon_, ErrorCode::TimestampOutOfRange,
          "no transition at t=" + std::to_string(t));
  return kinds_[t];
}

const Eigen::MatrixXd* AugmentedChain::base_at(std::size_t t) const {
  require(t < horizon_, ErrorCode::TimestampOutOfRange,
          "no transition at t=" + std::to_string(t));
  return t == 0 ? nullptr : &model_->at(t);
}

const Eigen::VectorXd& AugmentedChain::mask_at(std::size_t t) const {
  require(t < horizon_, ErrorCode::TimestampOutOfRange,
          "no transition at t=" + std::to_string(t));
  return masks_[t];
}

Eigen::MatrixXd AugmentedChain::dense(std::size_t t) const {
  const auto n = static_cast<Eigen::Index>(m_);
  const Eigen::MatrixXd* base = base_at(t);
  const Eigen::MatrixXd mat = base ? *base : Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  switch (kinds_[t]) {
    case BlockKind::Separate:
      out.topLeftCorner(n, n) = mat;
      out.bottomRightCorner(n, n) = mat;
      break;
    case BlockKind::Enter: {
      const Eigen::MatrixXd ms = mat * masks_[t].asDiagonal();
      out.topLeftCorner(n, n) = mat - ms;
      out.topRightCorner(n, n) = ms;
      out.bottomRightCorner(n, n) = mat;
      break;
    }
    case BlockKind::Stay: {
      const Eigen::MatrixXd ms = mat * masks_[t].asDiagonal();
      out.topLeftCorner(n, n) = mat;
      out.bottomLeftCorner(n, n) = mat - ms;
      out.bottomRightCorner(n, n) = ms;
      break;
    }
  }
  return out;
}

Eigen::RowVectorXd AugmentedChain::apply_left(std::size_t t,
                                              const Eigen::RowVectorXd& row) const {
  const auto n = static_cast<Eigen::Index>(m_);
  const Eigen::MatrixXd* base = base_at(t);
  auto times_m = [&](const Eigen::RowVectorXd& v) -> Eigen::RowVectorXd {
    return base ? Eigen::RowVectorXd(v * *base) : v;
  };
  const Eigen::RowVectorXd x = row.head(n);
  const Eigen::RowVectorXd y = row.tail(n);
  Eigen::RowVectorXd out(2 * n);
  switch (kinds_[t]) {
    case BlockKind::Separate:
      out << times_m(x), times_m(y);
      break;
    case BlockKind::Enter: {
      const Eigen::RowVectorXd u = times_m(x);
      const Eigen::RowVectorXd s = masks_[t].transpose();
      out << u.cwiseProduct((1.0 - s.array()).matrix()), u.cwiseProduct(s) + times_m(y);
      break;
    }
    case BlockKind::Stay: {
      const Eigen::RowVectorXd w = times_m(y);
      const Eigen::RowVectorXd s = masks_[t].transpose();
      out << times_m(x) + w.cwiseProduct((1.0 - s.array()).matrix()), w.cwiseProduct(s);
      break;
    }
  }
  return out;
}

Eigen::VectorXd AugmentedChain::apply_right(std::size_t t, const Eigen::VectorXd& col) const {
  const auto n = static_cast<Eigen::Index>(m_);
  const Eigen::MatrixXd* base = base_at(t);
  auto m_times = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return base ? Eigen::VectorXd(*base * v) : v;
  };
  const Eigen::VectorXd p = col.head(n);
  const Eigen::VectorXd q = col.tail(n);
  Eigen::VectorXd out(2 * n);
  switch (kinds_[t]) {
    case BlockKind::Separate:
      out << m_times(p), m_times(q);
      break;
    case BlockKind::Enter: {
      const auto& s = masks_[t];
      const Eigen::VectorXd mixed = p + s.cwiseProduct(q - p);
      out << m_times(mixed), m_times(q);
      break;
    }
    case BlockKind::Stay: {
      const auto& s = masks_[t];
      const Eigen::VectorXd mixed = p + s.cwiseProduct(q - p);
      out << m_times(p), m_times(mixed);
      break;
    }
  }
  return out;
}

void AugmentedChain::apply_left_block(std::size_t t, Eigen::MatrixXd& x,
                                      Eigen::MatrixXd& y, bool& y_zero) const {
  const Eigen::MatrixXd* base = base_at(t);
  auto times_m = [&](const Eigen::MatrixXd& v) -> Eigen::MatrixXd {
    if (!base) return v;
    Eigen::MatrixXd out(v.rows(), base->cols());
    out.noalias() = v * *base;
    return out;
  };
  switch (kinds_[t]) {
    case BlockKind::Separate:
      x = times_m(x);
      if (!y_zero) y = times_m(y);
      break;
    case BlockKind::Enter: {
      const auto& s = masks_[t];
      Eigen::MatrixXd u = times_m(x);
      Eigen::MatrixXd ym = y_zero ? Eigen::MatrixXd::Zero(y.rows(), y.cols()) : times_m(y);
      ym.noalias() += u * s.asDiagonal();
      x.noalias() = u * (1.0 - s.array()).matrix().asDiagonal();
      y.swap(ym);
      y_zero = false;
      break;
    }
    case BlockKind::Stay: {
      if (y_zero) {
        x = times_m(x);
        break;
      }
      const auto& s = masks_[t];
      const Eigen::MatrixXd w = times_m(y);
      x = times_m(x);
      x.noalias() += w * (1.0 - s.array()).matrix().asDiagonal();
      y.noalias() = w * s.asDiagonal();
      break;
    }
  }
}

const Eigen::VectorXd& AugmentedChain::suffix(std::size_t t) const {
  require(t < suffix_.size(), ErrorCode::TimestampOutOfRange,
          "suffix index beyond event end");
  return suffix_[t];
}

double ScaledProbability::value() const {
  if (mantissa == 0.0) return 0.0;
  return mantissa * std::exp(log_scale);
}

double ScaledProbability::log() const {
  if (mantissa <= 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(mantissa) + log_scale;
}

double prior(const AugmentedChain& chain, const Distribution& pi) {
  const auto n = static_cast<Eigen::Index>(chain.states());
  require(pi.size() == chain.states(), ErrorCode::InvalidArgument,
          "initial distribution size mismatch");
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(2 * n);
  row.head(n) = pi.probs().transpose();
  for (std::size_t t = 0; t < chain.event().end(); ++t) row = chain.apply_left(t, row);
  return row.tail(n).sum();
}

namespace {

// Forward pass alpha_t = alpha_{t-1} M_{t-1} diag(p_t) over the first
// `steps` emissions, starting from [pi, 0] M_0.
Eigen::RowVectorXd forward(const AugmentedChain& chain, const Distribution& pi,
                           std::span<const EmissionColumn> emissions, std::size_t steps,
                           double& log_scale, bool& vanished) {
  const auto n = static_cast<Eigen::Index>(chain.states());
  Eigen::RowVectorXd alpha = Eigen::RowVectorXd::Zero(2 * n);
  alpha.head(n) = pi.probs().transpose();
  alpha = chain.apply_left(0, alpha);
  vanished = false;
  for (std::size_t i = 1; i <= steps; ++i) {
    if (i >= 2) alpha = chain.apply_left(i - 1, alpha);
    const auto& p = emissions[i - 1].probs;
    alpha.head(n).array() *= p.transpose().array();
    alpha.tail(n).array() *= p.transpose().array();
    if (!rescale(alpha, log_scale)) {
      vanished = true;
      return alpha;
    }
  }
  return alpha;
}

void check_inputs(const AugmentedChain& chain, const Distribution& pi,
                  std::span<const EmissionColumn> emissions) {
  require(pi.size() == chain.states(), ErrorCode::InvalidArgument,
          "initial distribution size mismatch");
  require(emissions.size() <= chain.horizon(), ErrorCode::HorizonExceeded,
          "more observations than the chain horizon");
  for (const auto& e : emissions) check_emission(e, chain.states());
}

}  // namespace

ScaledProbability joint_before(const AugmentedChain& chain, const Distribution& pi,
                               std::span<const EmissionColumn> emissions, World world) {
  check_inputs(chain, pi, emissions);
  const std::size_t t = emissions.size();
  const std::size_t end = chain.event().end();
  require(t <= end, ErrorCode::HorizonExceeded,
          "joint_before needs t <= end; use joint_after");
  ScaledProbability out;
  bool vanished = false;
  Eigen::RowVectorXd alpha = forward(chain, pi, emissions, t, out.log_scale, vanished);
  if (vanished) return {0.0, 0.0};
  for (std::size_t i = std::max<std::size_t>(t, 1); i < end; ++i) {
    alpha = chain.apply_left(i, alpha);
  }
  out.mantissa = alpha.dot(world_mask(chain.states(), world).transpose());
  return out;
}

ScaledProbability joint_after(const AugmentedChain& chain, const Distribution& pi,
                              std::span<const EmissionColumn> emissions, World world) {
  check_inputs(chain, pi, emissions);
  const std::size_t t = emissions.size();
  const std::size_t end = chain.event().end();
  require(t > end, ErrorCode::InvalidArgument, "joint_after needs t > end");
  ScaledProbability out;
  bool vanished = false;
  const Eigen::RowVectorXd alpha = forward(chain, pi, emissions, end, out.log_scale, vanished);
  if (vanished) return {0.0, 0.0};

  // beta = [1,1] prod_{i=t-1}^{end} diag(p_{i+1}) M_i^T, kept as a column.
  const auto n = static_cast<Eigen::Index>(chain.states());
  Eigen::VectorXd beta = Eigen::VectorXd::Ones(2 * n);
  for (std::size_t i = t - 1; i >= end; --i) {
    const auto& p = emissions[i].probs;
    beta.head(n).array() *= p.array();
    beta.tail(n).array() *= p.array();
    beta = chain.apply_right(i, beta);
    if (!rescale(beta, out.log_scale)) return {0.0, 0.0};
    if (i == end) break;
  }
  out.mantissa = alpha.dot(beta.cwiseProduct(world_mask(chain.states(), world)).transpose());
  return out;
}

ScaledProbability joint(const AugmentedChain& chain, const Distribution& pi,
                        std::span<const EmissionColumn> emissions, World world) {
  return emissions.size() <= chain.event().end() ? joint_before(chain, pi, emissions, world)
                                                 : joint_after(chain, pi, emissions, world);
}

CheckVectors::CheckVectors(const AugmentedChain& chain)
    : m_(chain.states()), end_(chain.event().end()), a_(chain.a()) {
  const auto n = static_cast<Eigen::Index>(m_);
  b_ = a_.head(n);
  c_ = Eigen::VectorXd::Ones(n);
  x_ = Eigen::MatrixXd::Identity(n, n);
  y_ = Eigen::MatrixXd::Zero(n, n);
  bh_ = Eigen::MatrixXd::Identity(n, n);
}

CheckVectors::Candidate CheckVectors::evaluate(const AugmentedChain& chain,
                                               const EmissionColumn& emission) const {
  check_emission(emission, m_);
  const std::size_t t = t_ + 1;
  require(t <= chain.horizon(), ErrorCode::HorizonExceeded,
          "observation at t=" + std::to_string(t) + " beyond horizon");
  const auto n = static_cast<Eigen::Index>(m_);
  const Eigen::VectorXd& p = emission.probs;
  Candidate out;
  out.t = t;
  if (t <= end_) {
    const Eigen::VectorXd pp = duplicate(p);
    const Eigen::VectorXd gb = chain.apply_right(t - 1, pp.cwiseProduct(chain.suffix(t)));
    const Eigen::VectorXd gc = chain.apply_right(t - 1, pp);
    out.b.noalias() = x_ * gb.head(n);
    out.c.noalias() = x_ * gc.head(n);
    if (!y_zero_) {
      out.b.noalias() += y_ * gb.tail(n);
      out.c.noalias() += y_ * gc.tail(n);
    }
    out.log_scale = log_a_;
  } else {
    // Backward likelihood row r = [1,1] diag(p) M_{t-1}^T B, identical in
    // both worlds.
    const Eigen::VectorXd w = *chain.base_at(t - 1) * p;
    const Eigen::VectorXd r = bh_.transpose() * w;
    out.b = y_zero_ ? Eigen::VectorXd::Zero(n) : Eigen::VectorXd(y_ * r);
    out.c = x_ * r;
    if (!y_zero_) out.c += out.b;
    out.log_scale = log_a_ + log_b_;
  }
  return out;
}

CheckVectors advance(CheckVectors cv, const AugmentedChain& chain,
                     const EmissionColumn& emission) {
  auto cand = cv.evaluate(chain, emission);
  const std::size_t t = cand.t;
  cv.b_ = std::move(cand.b);
  cv.c_ = std::move(cand.c);
  cv.log_bc_ = cand.log_scale;
  const Eigen::VectorXd& p = emission.probs;
  if (t <= cv.end_) {
    chain.apply_left_block(t - 1, cv.x_, cv.y_, cv.y_zero_);
    cv.x_ = cv.x_ * p.asDiagonal();
    if (!cv.y_zero_) cv.y_ = cv.y_ * p.asDiagonal();
    const double s = std::max(max_abs(cv.x_), max_abs(cv.y_));
    if (s > 0.0) {
      cv.x_ /= s;
      cv.y_ /= s;
      cv.log_a_ += std::log(s);
    }
  } else {
    Eigen::MatrixXd next(cv.bh_.rows(), cv.bh_.cols());
    next.noalias() = chain.base_at(t - 1)->transpose() * cv.bh_;
    cv.bh_ = p.asDiagonal() * next;
    const double s = max_abs(cv.bh_);
    if (s > 0.0) {
      cv.bh_ /= s;
      cv.log_b_ += std::log(s);
    }
  }
  cv.t_ = t;
  return cv;
}

CheckVectors advance(CheckVectors cv, const AugmentedChain& chain, std::size_t t,
                     const EmissionColumn& emission) {
  require(t == cv.t() + 1, ErrorCode::OutOfOrder,
          "observation for t=" + std::to_string(t) + " but next expected t=" +
              std::to_string(cv.t() + 1));
  return advance(std::move(cv), chain, emission);
}

}  // namespace stp
