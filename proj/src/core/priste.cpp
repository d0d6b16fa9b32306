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

#include "priste.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "error.hpp"
#include "sampling.hpp"

namespace stp {

const char* to_string(MechanismKind kind) noexcept {
  switch (kind) {
    case MechanismKind::PlanarLaplace:
      return "plm";
    case MechanismKind::PlanarLaplaceDeltaSet:
      return "plm_deltaset";
    case MechanismKind::Uniform:
      return "uniform";
  }
  return "unknown";
}

MechanismKind mechanism_from_string(const std::string& name) {
  if (name == "plm") return MechanismKind::PlanarLaplace;
  if (name == "plm_deltaset") return MechanismKind::PlanarLaplaceDeltaSet;
  if (name == "uniform") return MechanismKind::Uniform;
  fail(ErrorCode::ConfigError, "unknown mechanism '" + name + "'");
}

ReleaseSession::ReleaseSession(GridMap map, std::shared_ptr<const MarkovModel> model,
                               std::vector<Event> events, SessionConfig config,
                               std::shared_ptr<PlanarLaplaceCache> cache)
    : map_(std::move(map)),
      model_(std::move(model)),
      config_(config),
      cache_(std::move(cache)),
      p_minus_(Distribution::uniform(map_.size())),
      p_plus_(Distribution::uniform(map_.size())) {
  require(model_ != nullptr, ErrorCode::InvalidArgument, "null model");
  require(model_->states() == map_.size(), ErrorCode::InvalidArgument,
          "model has " + std::to_string(model_->states()) + " states but the grid has " +
              std::to_string(map_.size()) + " cells");
  require(config_.epsilon > 0.0, ErrorCode::InvalidArgument, "epsilon must be positive");
  require(config_.initial_alpha > 0.0, ErrorCode::InvalidArgument, "alpha must be positive");
  require(config_.decay > 0.0 && config_.decay < 1.0, ErrorCode::InvalidArgument,
          "decay must lie in (0, 1)");
  require(config_.delta >= 0.0 && config_.delta < 1.0, ErrorCode::InvalidArgument,
          "delta must lie in [0, 1)");
  require(config_.horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
  if (!cache_) cache_ = std::make_shared<PlanarLaplaceCache>(map_, config_.subsamples);
  chains_.reserve(events.size());
  checks_.reserve(events.size());
  for (auto& e : events) {
    chains_.emplace_back(std::move(e), model_, config_.horizon);
    checks_.emplace_back(chains_.back());
  }
}

bool ReleaseSession::check(const EmissionColumn& column, ReleaseRecord& record) const {
  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  CertifyOptions opts;
  opts.budget_ms = config_.check_budget_ms;
  opts.feasible = config_.feasible;
  opts.seed = mix_seed(config_.seed, record.t);
  bool ok = true;
  for (std::size_t k = 0; k < chains_.size() && ok; ++k) {
    const auto cand = checks_[k].evaluate(chains_[k], column);
    const auto conds = build_conditions(checks_[k].a(), cand.b, cand.c, {config_.epsilon});
    // Events impossible under every initial distribution have nothing to
    // protect.
    if (conds.forward.degenerate) continue;
    for (const auto* cond : {&conds.forward, &conds.backward}) {
      const auto verdict = certify(*cond, opts);
      if (std::holds_alternative<Certified>(verdict)) continue;
      if (const auto* u = std::get_if<Unknown>(&verdict)) {
        ++record.unknown_verdicts;
        if (u->timed_out) ++record.timed_out_verdicts;
      } else {
        ++record.refuted_verdicts;
      }
      ok = false;
      break;
    }
  }
  record.check_ms += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
  return ok;
}

void ReleaseSession::commit(const EmissionColumn& column, ReleaseRecord record) {
  for (std::size_t k = 0; k < chains_.size(); ++k) {
    checks_[k] = advance(std::move(checks_[k]), chains_[k], record.t, column);
  }
  record.distance_km = map_.euclidean_km(record.true_cell, record.observed_cell);
  emissions_.push_back(column);
  released_.push_back(record);
  t_ = record.t;
}

ReleaseRecord ReleaseSession::run_loop(CellIndex true_cell,
                                       const std::optional<DeltaLocationSet>& location_set) {
  require(t_ < config_.horizon, ErrorCode::HorizonExceeded,
          "session horizon " + std::to_string(config_.horizon) + " reached");
  require(map_.valid(true_cell), ErrorCode::OutOfBounds, "true cell outside the grid");
  ReleaseRecord record;
  record.t = t_ + 1;
  record.true_cell = true_cell;
  const std::uint64_t step_seed = mix_seed(config_.seed, record.t);
  const bool uniform = config_.mechanism == MechanismKind::Uniform;

  auto build = [&](std::shared_ptr<const EmissionMatrix> base) {
    if (!location_set) return base;
    return std::make_shared<const EmissionMatrix>(restrict(*base, *location_set));
  };

  double alpha = config_.initial_alpha;
  for (std::size_t halvings = 0; halvings <= config_.max_halvings; ++halvings) {
    const auto matrix = uniform ? build(std::make_shared<const EmissionMatrix>(
                                      uniform_matrix(map_.size())))
                                : build(cache_->get(alpha));
    Rng rng(mix_seed(step_seed, halvings));
    const CellIndex obs = sample_output(*matrix, true_cell, rng);
    const EmissionColumn column = matrix->column(obs);
    if (check(column, record)) {
      record.observed_cell = obs;
      record.halvings = halvings;
      record.alpha_used = uniform ? 0.0 : alpha;
      commit(column, record);
      return released_.back();
    }
    if (uniform) break;
    alpha *= config_.decay;
  }

  const auto matrix = build(std::make_shared<const EmissionMatrix>(uniform_matrix(map_.size())));
  Rng rng(mix_seed(step_seed, config_.max_halvings + 1));
  record.observed_cell = sample_output(*matrix, true_cell, rng);
  record.halvings = uniform ? 0 : config_.max_halvings + 1;
  record.alpha_used = uniform ? 0.0 : alpha;
  record.forced_uniform = true;
  commit(matrix->column(record.observed_cell), record);
  return released_.back();
}

ReleaseRecord ReleaseSession::step_geoind(CellIndex true_cell) {
  return run_loop(true_cell, std::nullopt);
}

ReleaseRecord ReleaseSession::step_uniform(CellIndex true_cell) {
  return run_loop(true_cell, std::nullopt);
}

ReleaseRecord ReleaseSession::step_deltaset(CellIndex true_cell) {
  // p-_1 is the uniform initial distribution, afterwards p-_t = p+_{t-1} M.
  if (t_ > 0) {
    Eigen::VectorXd next = (p_plus_.probs().transpose() * model_->at(t_)).transpose();
    next /= next.sum();
    p_minus_ = Distribution(std::move(next));
  }
  const auto set = delta_set(p_minus_, config_.delta);
  auto record = run_loop(true_cell, set);
  p_plus_ = posterior(p_minus_, emissions_.back());
  return record;
}

ReleaseRecord ReleaseSession::step(CellIndex true_cell) {
  switch (config_.mechanism) {
    case MechanismKind::PlanarLaplace:
      return step_geoind(true_cell);
    case MechanismKind::PlanarLaplaceDeltaSet:
      return step_deltaset(true_cell);
    case MechanismKind::Uniform:
      return step_uniform(true_cell);
  }
  fail(ErrorCode::InvalidArgument, "unknown mechanism");
}

std::vector<ReleaseRecord> run_session(ReleaseSession& session, const Trajectory& trajectory) {
  require(trajectory.size() + session.t() <= session.config().horizon,
          ErrorCode::HorizonExceeded, "trajectory longer than the session horizon");
  std::vector<ReleaseRecord> out;
  out.reserve(trajectory.size());
  for (std::size_t t = 1; t <= trajectory.size(); ++t) out.push_back(session.step(trajectory.at(t)));
  return out;
}

}  // namespace stp
