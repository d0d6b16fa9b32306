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

#include "events.hpp"
#include "markov.hpp"
#include "twoworld.hpp"

namespace stp {

// Exhaustive reference computations. They walk all m^H trajectories and are
// meant for tests and the benchmark baseline only.

inline constexpr double kEnumerationLimit = 1e7;

// Pr(event) summed over every trajectory of length `horizon` on which the
// event holds. TooLarge when m^horizon exceeds kEnumerationLimit.
double enumerate_prior(const BoolEvent& event, const MarkovModel& model,
                       const Distribution& pi, std::size_t horizon);
double enumerate_prior(const Event& event, const MarkovModel& model,
                       const Distribution& pi, std::size_t horizon);

// Pr(event, o_1..o_t): each trajectory weighs pi[u1] * prod M[u_{t-1}, u_t]
// * prod p_t[u_t]. Timestamps past the last emission contribute no
// likelihood factor. The horizon is max(emissions, event extent).
double enumerate_joint(const BoolEvent& event, const MarkovModel& model,
                       const Distribution& pi, std::span<const EmissionColumn> emissions,
                       World world = World::EventTrue);
double enumerate_joint(const Event& event, const MarkovModel& model,
                       const Distribution& pi, std::span<const EmissionColumn> emissions,
                       World world = World::EventTrue);

// Plain HMM forward pass: Pr(o_1..o_t).
double forward_likelihood(const MarkovModel& model, const Distribution& pi,
                          std::span<const EmissionColumn> emissions);

struct BenchInstance {
  std::shared_ptr<const MarkovModel> model;
  Event event;
  Distribution pi;
  std::vector<EmissionColumn> emissions;
};

struct BenchTiming {
  double fast_ns = 0.0;
  double naive_ns = 0.0;
  double fast_value = 0.0;
  double naive_value = 0.0;
};

// Times the two-world joint against enumeration on the same inputs. The
// results are compared first; a mismatch beyond 1e-9 throws
// InvalidArgument. fast_ns is the median over `repeats` runs.
BenchTiming bench_pair(const BenchInstance& instance, std::size_t repeats = 5);

// Fast path only (chain construction plus joint), median ns over repeats.
double time_fast_path(const BenchInstance& instance, std::size_t repeats = 5);

}  // namespace stp
