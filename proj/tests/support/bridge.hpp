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

#include <memory>
#include <vector>

#include "brute.hpp"
#include "events.hpp"
#include "markov.hpp"
#include "twoworld.hpp"

namespace bridge {

inline stp::RegionMask mask(const std::vector<int>& bits) {
  std::vector<std::uint8_t> b(bits.begin(), bits.end());
  return stp::RegionMask(std::move(b));
}

inline stp::Event event(const brute::Instance& in) {
  if (!in.pattern) return stp::Event::presence(mask(in.masks[0]), in.start, in.end);
  std::vector<stp::RegionMask> regions;
  for (const auto& m : in.masks) regions.push_back(mask(m));
  return stp::Event::pattern(std::move(regions), in.start);
}

inline std::shared_ptr<const stp::MarkovModel> model(const brute::Instance& in) {
  return std::make_shared<const stp::MarkovModel>(in.m);
}

inline std::vector<stp::EmissionColumn> columns(const brute::Instance& in) {
  std::vector<stp::EmissionColumn> out;
  for (const auto& e : in.emissions) out.push_back({e});
  return out;
}

inline stp::AugmentedChain chain(const brute::Instance& in) {
  return stp::AugmentedChain(event(in), model(in), brute::horizon_of(in));
}

}  // namespace bridge
