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
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "markov.hpp"
#include "statespace.hpp"

namespace stp {

class RegionMask {
 public:
  RegionMask() = default;
  explicit RegionMask(std::vector<std::uint8_t> bits);

  static RegionMask none(std::size_t m);
  static RegionMask all(std::size_t m);
  static RegionMask from_cells(std::size_t m, const std::vector<std::size_t>& cells);

  std::size_t size() const noexcept { return bits_.size(); }
  bool contains(std::size_t i) const { return bits_.at(i) != 0; }
  std::size_t count() const noexcept;
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  Eigen::VectorXd as_vector() const;

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

enum class EventKind { Presence, Pattern };

// PRESENCE: the user is inside the region at some timestamp of
// [start, end]. PATTERN: the user is inside regions[k] at timestamp
// start + k for every k. Timestamps are 1-based.
class Event {
 public:
  static Event presence(RegionMask region, std::size_t start, std::size_t end);
  static Event pattern(std::vector<RegionMask> regions, std::size_t start);

  EventKind kind() const noexcept { return kind_; }
  std::size_t start() const noexcept { return start_; }
  std::size_t end() const noexcept { return end_; }
  std::size_t states() const noexcept { return regions_.front().size(); }
  const std::vector<RegionMask>& regions() const noexcept { return regions_; }

  // Region that must be hit at timestamp t, start <= t <= end.
  const RegionMask& region_at(std::size_t t) const;

  // Throws WindowOutOfRange unless 1 <= start <= end <= horizon, and
  // InvalidArgument if the masks do not match m.
  void validate(std::size_t m, std::size_t horizon) const;

  // Direct set-membership semantics on a trajectory covering [1, end].
  bool occurs_in(const Trajectory& traj) const;

 private:
  Event(EventKind kind, std::vector<RegionMask> regions, std::size_t start,
        std::size_t end);

  EventKind kind_;
  std::vector<RegionMask> regions_;
  std::size_t start_;
  std::size_t end_;
};

// General Boolean combination of (timestamp, cell) predicates. Only the
// enumeration oracle evaluates these; the linear-time machinery handles
// PRESENCE and PATTERN only.
class BoolEvent {
 public:
  struct Predicate {
    std::size_t t;
    CellIndex cell;
  };
  struct AllOf {
    std::vector<BoolEvent> terms;
  };
  struct AnyOf {
    std::vector<BoolEvent> terms;
  };
  struct Not {
    std::shared_ptr<const BoolEvent> term;
  };
  using Node = std::variant<Predicate, AllOf, AnyOf, Not>;

  static BoolEvent predicate(std::size_t t, CellIndex cell);
  static BoolEvent all_of(std::vector<BoolEvent> terms);
  static BoolEvent any_of(std::vector<BoolEvent> terms);
  static BoolEvent negate(BoolEvent term);

  const Node& node() const noexcept { return *node_; }

  // Largest timestamp referenced (0 for an empty expression).
  std::size_t max_timestamp() const;
  // Largest cell index referenced plus one.
  std::size_t min_states() const;

  // "(u3=s1)" style rendering with 1-based cell names.
  std::string to_string() const;

 private:
  explicit BoolEvent(Node node) : node_(std::make_shared<const Node>(std::move(node))) {}

  std::shared_ptr<const Node> node_;
};

// Throws TimestampOutOfRange if the trajectory is shorter than a
// referenced timestamp.
bool evaluate(const BoolEvent& event, const Trajectory& traj);

BoolEvent lower(const Event& event);

// {"kind":"presence"|"pattern","regions":[[0,1,...]],"start":3,"end":4}
// A "cells" array of index lists is accepted in place of "regions".
Event event_from_json(const nlohmann::json& doc, std::size_t m);
nlohmann::json event_to_json(const Event& event);
// Accepts a single event object or an array of them.
std::vector<Event> events_from_json(const nlohmann::json& doc, std::size_t m);

}  // namespace stp
