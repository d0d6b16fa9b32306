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

#include "oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "error.hpp"

namespace stp {
namespace {

void guard(std::size_t m, std::size_t horizon) {
  const double count = std::pow(static_cast<double>(m), static_cast<double>(horizon));
  require(count <= kEnumerationLimit, ErrorCode::TooLarge,
          "enumeration over " + std::to_string(m) + "^" + std::to_string(horizon) +
              " trajectories exceeds the limit");
}

// Mixed-radix walk over all trajectories, summing `weight` where the
// predicate holds.
template <typename Pred>
double enumerate(const MarkovModel& model, const Distribution& pi,
                 std::span<const EmissionColumn> emissions, std::size_t horizon,
                 Pred&& holds) {
  const std::size_t m = model.states();
  require(pi.size() == m, ErrorCode::InvalidArgument, "initial distribution size mismatch");
  require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be >= 1");
  require(horizon <= model.max_horizon(), ErrorCode::HorizonExceeded,
          "model does not cover the horizon");
  for (const auto& e : emissions) check_emission(e, m);
  guard(m, horizon);

  Trajectory traj;
  traj.cells.assign(horizon, CellIndex{0});
  double total = 0.0;
  for (;;) {
    if (holds(traj)) {
      double p = pi[traj.cells[0].value];
      if (!emissions.empty()) p *= emissions[0].probs(static_cast<Eigen::Index>(traj.cells[0].value));
      for (std::size_t t = 1; t < horizon && p != 0.0; ++t) {
        const auto prev = static_cast<Eigen::Index>(traj.cells[t - 1].value);
        const auto cur = static_cast<Eigen::Index>(traj.cells[t].value);
        p *= model.at(t)(prev, cur);
        if (t < emissions.size()) p *= emissions[t].probs(cur);
      }
      total += p;
    }
    std::size_t k = horizon;
    while (k > 0) {
      --k;
      if (++traj.cells[k].value < m) break;
      traj.cells[k].value = 0;
      if (k == 0) return total;
    }
  }
}

double median(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double fast_joint(const BenchInstance& in) {
  const std::size_t horizon = std::max(in.emissions.size(), in.event.end());
  AugmentedChain chain(in.event, in.model, horizon);
  return joint(chain, in.pi, in.emissions).value();
}

}  // namespace

double enumerate_prior(const BoolEvent& event, const MarkovModel& model,
                       const Distribution& pi, std::size_t horizon) {
  require(event.max_timestamp() <= horizon, ErrorCode::TimestampOutOfRange,
          "event references timestamps beyond the horizon");
  return enumerate(model, pi, {}, horizon,
                   [&](const Trajectory& traj) { return evaluate(event, traj); });
}

double enumerate_prior(const Event& event, const MarkovModel& model, const Distribution& pi,
                       std::size_t horizon) {
  return enumerate_prior(lower(event), model, pi, horizon);
}

double enumerate_joint(const BoolEvent& event, const MarkovModel& model,
                       const Distribution& pi, std::span<const EmissionColumn> emissions,
                       World world) {
  const std::size_t horizon = std::max<std::size_t>(
      {emissions.size(), event.max_timestamp(), std::size_t{1}});
  const bool want = world == World::EventTrue;
  return enumerate(model, pi, emissions, horizon,
                   [&](const Trajectory& traj) { return evaluate(event, traj) == want; });
}

double enumerate_joint(const Event& event, const MarkovModel& model, const Distribution& pi,
                       std::span<const EmissionColumn> emissions, World world) {
  return enumerate_joint(lower(event), model, pi, emissions, world);
}

double forward_likelihood(const MarkovModel& model, const Distribution& pi,
                          std::span<const EmissionColumn> emissions) {
  require(pi.size() == model.states(), ErrorCode::InvalidArgument,
          "initial distribution size mismatch");
  if (emissions.empty()) return 1.0;
  for (const auto& e : emissions) check_emission(e, model.states());
  Eigen::RowVectorXd alpha = pi.probs().transpose().cwiseProduct(emissions[0].probs.transpose());
  double log_scale = 0.0;
  for (std::size_t t = 1; t < emissions.size(); ++t) {
    alpha = (alpha * model.at(t)).cwiseProduct(emissions[t].probs.transpose());
    const double s = alpha.sum();
    if (!(s > 0.0)) return 0.0;
    alpha /= s;
    log_scale += std::log(s);
  }
  return alpha.sum() * std::exp(log_scale);
}

double time_fast_path(const BenchInstance& instance, std::size_t repeats) {
  using clock = std::chrono::steady_clock;
  std::vector<double> samples;
  volatile double sink = 0.0;
  for (std::size_t r = 0; r < std::max<std::size_t>(repeats, 1); ++r) {
    const auto t0 = clock::now();
    sink = sink + fast_joint(instance);
    samples.push_back(std::chrono::duration<double, std::nano>(clock::now() - t0).count());
  }
  return median(std::move(samples));
}

BenchTiming bench_pair(const BenchInstance& instance, std::size_t repeats) {
  using clock = std::chrono::steady_clock;
  BenchTiming out;
  out.fast_value = fast_joint(instance);

  const auto t0 = clock::now();
  out.naive_value = enumerate_joint(instance.event, *instance.model, instance.pi,
                                    instance.emissions);
  out.naive_ns = std::chrono::duration<double, std::nano>(clock::now() - t0).count();

  const double diff = std::abs(out.fast_value - out.naive_value);
  require(diff <= 1e-9 * std::max(1.0, std::abs(out.naive_value)), ErrorCode::InvalidArgument,
          "fast and naive joint disagree: " + std::to_string(out.fast_value) + " vs " +
              std::to_string(out.naive_value));
  out.fast_ns = time_fast_path(instance, repeats);
  return out;
}

}  // namespace stp
