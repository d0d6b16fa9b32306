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
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "checker.hpp"
#include "events.hpp"
#include "lppm.hpp"
#include "markov.hpp"
#include "statespace.hpp"
#include "twoworld.hpp"

namespace stp {

enum class MechanismKind { PlanarLaplace, PlanarLaplaceDeltaSet, Uniform };

const char* to_string(MechanismKind kind) noexcept;
MechanismKind mechanism_from_string(const std::string& name);

struct SessionConfig {
  double epsilon = 1.0;
  MechanismKind mechanism = MechanismKind::PlanarLaplace;
  double initial_alpha = 0.2;
  double decay = 0.5;
  double delta = 0.05;
  std::size_t subsamples = 3;
  double check_budget_ms = std::numeric_limits<double>::infinity();
  std::size_t max_halvings = 40;
  FeasibleSet feasible = FeasibleSet::Simplex;
  std::size_t horizon = 50;
  std::uint64_t seed = 0;
};

struct ReleaseRecord {
  std::size_t t = 0;
  CellIndex true_cell;
  CellIndex observed_cell;
  double alpha_used = 0.0;
  std::size_t halvings = 0;
  double distance_km = 0.0;
  // Released from the uniform mechanism after max_halvings rejections.
  bool forced_uniform = false;
  // Verdict counts over all retries of this timestamp.
  std::size_t unknown_verdicts = 0;
  std::size_t refuted_verdicts = 0;
  std::size_t timed_out_verdicts = 0;
  double check_ms = 0.0;
};

// Online release loop for one user. Each step draws a candidate output,
// checks every protected event against it, and either commits the
// observation or shrinks the mechanism budget and redraws.
class ReleaseSession {
 public:
  ReleaseSession(GridMap map, std::shared_ptr<const MarkovModel> model,
                 std::vector<Event> events, SessionConfig config,
                 std::shared_ptr<PlanarLaplaceCache> cache = nullptr);

  // Dispatches on config().mechanism.
  ReleaseRecord step(CellIndex true_cell);
  ReleaseRecord step_geoind(CellIndex true_cell);
  ReleaseRecord step_deltaset(CellIndex true_cell);
  ReleaseRecord step_uniform(CellIndex true_cell);

  std::size_t t() const noexcept { return t_; }
  const SessionConfig& config() const noexcept { return config_; }
  const GridMap& map() const noexcept { return map_; }
  const std::vector<ReleaseRecord>& released() const noexcept { return released_; }
  const std::vector<EmissionColumn>& emissions() const noexcept { return emissions_; }
  const std::vector<AugmentedChain>& chains() const noexcept { return chains_; }
  const std::vector<CheckVectors>& check_state() const noexcept { return checks_; }
  const Distribution& p_plus() const noexcept { return p_plus_; }

 private:
  // Returns true when every event certifies the candidate column.
  bool check(const EmissionColumn& column, ReleaseRecord& record) const;
  void commit(const EmissionColumn& column, ReleaseRecord record);
  ReleaseRecord run_loop(CellIndex true_cell,
                         const std::optional<DeltaLocationSet>& location_set);

  GridMap map_;
  std::shared_ptr<const MarkovModel> model_;
  SessionConfig config_;
  std::shared_ptr<PlanarLaplaceCache> cache_;
  std::vector<AugmentedChain> chains_;
  std::vector<CheckVectors> checks_;
  std::size_t t_ = 0;
  std::vector<ReleaseRecord> released_;
  std::vector<EmissionColumn> emissions_;
  Distribution p_minus_;
  Distribution p_plus_;
};

std::vector<ReleaseRecord> run_session(ReleaseSession& session, const Trajectory& trajectory);

}  // namespace stp
