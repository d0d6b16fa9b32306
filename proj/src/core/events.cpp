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

#include "events.hpp"

#include <cctype>
#include <algorithm>
#include <numeric>

#include "error.hpp"

namespace stp {

RegionMask::RegionMask(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  require(!bits_.empty(), ErrorCode::InvalidArgument, "empty region mask");
  for (auto& b : bits_) {
    require(b <= 1, ErrorCode::InvalidArgument, "region mask entries must be 0 or 1");
  }
}

RegionMask RegionMask::none(std::size_t m) {
  return RegionMask(std::vector<std::uint8_t>(m, 0));
}

RegionMask RegionMask::all(std::size_t m) {
  return RegionMask(std::vector<std::uint8_t>(m, 1));
}

RegionMask RegionMask::from_cells(std::size_t m, const std::vector<std::size_t>& cells) {
  std::vector<std::uint8_t> bits(m, 0);
  for (auto c : cells) {
    require(c < m, ErrorCode::OutOfBounds, "region cell " + std::to_string(c) + " outside grid");
    bits[c] = 1;
  }
  return RegionMask(std::move(bits));
}

std::size_t RegionMask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

Eigen::VectorXd RegionMask::as_vector() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(bits_.size()));
  for (std::size_t i = 0; i < bits_.size(); ++i) v(static_cast<Eigen::Index>(i)) = bits_[i];
  return v;
}

Event::Event(EventKind kind, std::vector<RegionMask> regions, std::size_t start,
             std::size_t end)
    : kind_(kind), regions_(std::move(regions)), start_(start), end_(end) {
  require(!regions_.empty(), ErrorCode::InvalidArgument, "event needs a region");
  require(start_ >= 1 && start_ <= end_, ErrorCode::WindowOutOfRange,
          "event window must satisfy 1 <= start <= end");
  const auto m = regions_.front().size();
  for (const auto& r : regions_) {
    require(r.size() == m, ErrorCode::InvalidArgument, "region masks differ in size");
  }
  if (kind_ == EventKind::Pattern) {
    require(regions_.size() == end_ - start_ + 1, ErrorCode::InvalidArgument,
            "pattern needs one region per window timestamp");
  } else {
    require(regions_.size() == 1, ErrorCode::InvalidArgument,
            "presence carries exactly one region");
  }
}

Event Event::presence(RegionMask region, std::size_t start, std::size_t end) {
  return Event(EventKind::Presence, {std::move(region)}, start, end);
}

Event Event::pattern(std::vector<RegionMask> regions, std::size_t start) {
  require(!regions.empty(), ErrorCode::InvalidArgument, "pattern needs regions");
  const std::size_t end = start + regions.size() - 1;
  return Event(EventKind::Pattern, std::move(regions), start, end);
}

const RegionMask& Event::region_at(std::size_t t) const {
  require(t >= start_ && t <= end_, ErrorCode::TimestampOutOfRange,
          "timestamp outside event window");
  return kind_ == EventKind::Presence ? regions_.front() : regions_[t - start_];
}

void Event::validate(std::size_t m, std::size_t horizon) const {
  require(states() == m, ErrorCode::InvalidArgument,
          "event masks have " + std::to_string(states()) + " cells, model has " +
              std::to_string(m));
  require(end_ <= horizon, ErrorCode::WindowOutOfRange,
          "event window [" + std::to_string(start_) + ", " + std::to_string(end_) +
              "] exceeds horizon " + std::to_string(horizon));
}

bool Event::occurs_in(const Trajectory& traj) const {
  require(traj.size() >= end_, ErrorCode::TimestampOutOfRange,
          "trajectory shorter than event window");
  if (kind_ == EventKind::Presence) {
    for (std::size_t t = start_; t <= end_; ++t) {
      if (regions_.front().contains(traj.at(t).value)) return true;
    }
    return false;
  }
  for (std::size_t t = start_; t <= end_; ++t) {
    if (!region_at(t).contains(traj.at(t).value)) return false;
  }
  return true;
}

BoolEvent BoolEvent::predicate(std::size_t t, CellIndex cell) {
  require(t >= 1, ErrorCode::TimestampOutOfRange, "timestamps start at 1");
  return BoolEvent(Node{Predicate{t, cell}});
}

BoolEvent BoolEvent::all_of(std::vector<BoolEvent> terms) {
  return BoolEvent(Node{AllOf{std::move(terms)}});
}

BoolEvent BoolEvent::any_of(std::vector<BoolEvent> terms) {
  return BoolEvent(Node{AnyOf{std::move(terms)}});
}

BoolEvent BoolEvent::negate(BoolEvent term) {
  return BoolEvent(Node{Not{std::make_shared<const BoolEvent>(std::move(term))}});
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::size_t fold_max(const std::vector<BoolEvent>& terms,
                     std::size_t (BoolEvent::*fn)() const) {
  std::size_t best = 0;
  for (const auto& t : terms) best = std::max(best, (t.*fn)());
  return best;
}

}  // namespace

std::size_t BoolEvent::max_timestamp() const {
  return std::visit(
      Overloaded{[](const Predicate& p) { return p.t; },
                 [](const AllOf& a) { return fold_max(a.terms, &BoolEvent::max_timestamp); },
                 [](const AnyOf& a) { return fold_max(a.terms, &BoolEvent::max_timestamp); },
                 [](const Not& n) { return n.term->max_timestamp(); }},
      *node_);
}

std::size_t BoolEvent::min_states() const {
  return std::visit(
      Overloaded{[](const Predicate& p) { return p.cell.value + 1; },
                 [](const AllOf& a) { return fold_max(a.terms, &BoolEvent::min_states); },
                 [](const AnyOf& a) { return fold_max(a.terms, &BoolEvent::min_states); },
                 [](const Not& n) { return n.term->min_states(); }},
      *node_);
}

std::string BoolEvent::to_string() const {
  auto join = [](const std::vector<BoolEvent>& terms, const char* op) {
    std::string out = "(";
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (i > 0) out += op;
      out += terms[i].to_string();
    }
    return out + ")";
  };
  return std::visit(
      Overloaded{[](const Predicate& p) {
                   return "(u" + std::to_string(p.t) + "=s" +
                          std::to_string(p.cell.value + 1) + ")";
                 },
                 [&](const AllOf& a) { return join(a.terms, "&"); },
                 [&](const AnyOf& a) { return join(a.terms, "|"); },
                 [](const Not& n) { return "!" + n.term->to_string(); }},
      *node_);
}

bool evaluate(const BoolEvent& event, const Trajectory& traj) {
  return std::visit(
      Overloaded{[&](const BoolEvent::Predicate& p) {
                   require(p.t >= 1 && p.t <= traj.size(), ErrorCode::TimestampOutOfRange,
                           "predicate timestamp " + std::to_string(p.t) +
                               " beyond trajectory of length " + std::to_string(traj.size()));
                   return traj.at(p.t) == p.cell;
                 },
                 [&](const BoolEvent::AllOf& a) {
                   // Evaluate every term so out-of-range timestamps always surface.
                   bool all = true;
                   for (const auto& t : a.terms) all = evaluate(t, traj) && all;
                   return all;
                 },
                 [&](const BoolEvent::AnyOf& a) {
                   bool any = false;
                   for (const auto& t : a.terms) any = evaluate(t, traj) || any;
                   return any;
                 },
                 [&](const BoolEvent::Not& n) { return !evaluate(*n.term, traj); }},
      event.node());
}

BoolEvent lower(const Event& event) {
  auto disjunction_at = [&](std::size_t t, std::vector<BoolEvent>& out) {
    const auto& region = event.region_at(t);
    for (std::size_t i = 0; i < region.size(); ++i) {
      if (region.contains(i)) out.push_back(BoolEvent::predicate(t, CellIndex{i}));
    }
  };
  if (event.kind() == EventKind::Presence) {
    std::vector<BoolEvent> terms;
    for (std::size_t t = event.start(); t <= event.end(); ++t) disjunction_at(t, terms);
    return BoolEvent::any_of(std::move(terms));
  }
  std::vector<BoolEvent> steps;
  for (std::size_t t = event.start(); t <= event.end(); ++t) {
    std::vector<BoolEvent> terms;
    disjunction_at(t, terms);
    steps.push_back(BoolEvent::any_of(std::move(terms)));
  }
  return BoolEvent::all_of(std::move(steps));
}

Event event_from_json(const nlohmann::json& doc, std::size_t m) {
  try {
    auto kind = doc.at("kind").get<std::string>();
    std::transform(kind.begin(), kind.end(), kind.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    std::vector<RegionMask> regions;
    if (doc.contains("regions")) {
      for (const auto& r : doc.at("regions")) {
        auto bits = r.get<std::vector<std::uint8_t>>();
        require(bits.size() == m, ErrorCode::ParseError,
                "region mask has " + std::to_string(bits.size()) + " entries, expected " +
                    std::to_string(m));
        regions.emplace_back(std::move(bits));
      }
    } else {
      for (const auto& r : doc.at("cells")) {
        regions.push_back(RegionMask::from_cells(m, r.get<std::vector<std::size_t>>()));
      }
    }
    require(!regions.empty(), ErrorCode::ParseError, "event has no regions");
    const auto start = doc.at("start").get<std::size_t>();
    if (kind == "presence") {
      require(regions.size() == 1, ErrorCode::ParseError,
              "presence event takes exactly one region");
      return Event::presence(std::move(regions.front()), start,
                             doc.at("end").get<std::size_t>());
    }
    if (kind == "pattern") {
      if (doc.contains("end")) {
        require(doc["end"].get<std::size_t>() + 1 == start + regions.size(),
                ErrorCode::ParseError, "pattern needs end - start + 1 regions");
      }
      return Event::pattern(std::move(regions), start);
    }
    fail(ErrorCode::ParseError, "unknown event kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::ParseError, std::string("event JSON: ") + e.what());
  }
}

nlohmann::json event_to_json(const Event& event) {
  nlohmann::json doc;
  doc["kind"] = event.kind() == EventKind::Presence ? "presence" : "pattern";
  doc["regions"] = nlohmann::json::array();
  for (const auto& r : event.regions()) doc["regions"].push_back(r.bits());
  doc["start"] = event.start();
  doc["end"] = event.end();
  return doc;
}

std::vector<Event> events_from_json(const nlohmann::json& doc, std::size_t m) {
  std::vector<Event> events;
  if (doc.is_array()) {
    for (const auto& e : doc) events.push_back(event_from_json(e, m));
  } else {
    events.push_back(event_from_json(doc, m));
  }
  require(!events.empty(), ErrorCode::ParseError, "no events defined");
  return events;
}

}  // namespace stp
