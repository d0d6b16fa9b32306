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
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "checker.hpp"
#include "events.hpp"
#include "priste.hpp"
#include "statespace.hpp"

namespace stp {

struct GridSpec {
  std::size_t rows = 20;
  std::size_t cols = 20;
  double cell_size_m = 1000.0;
  double origin_lat = 0.0;
  double origin_lon = 0.0;

  GridMap make() const { return GridMap(rows, cols, cell_size_m, {origin_lat, origin_lon}); }
};

enum class ModelSource { Synth, Train, File };

struct ModelSpec {
  ModelSource source = ModelSource::Synth;
  double sigma = 1.0;  // cell units
  std::filesystem::path trajectories;
  double resample_seconds = 0.0;
  double smoothing = 0.01;
  std::filesystem::path path;
};

struct MechanismSpec {
  MechanismKind kind = MechanismKind::PlanarLaplace;
  std::vector<double> alpha{0.2};
  std::vector<double> delta{0.05};
  std::size_t subsamples = 3;
  double decay = 0.5;
  std::size_t max_halvings = 40;
};

struct PrivacySpec {
  std::vector<double> epsilon{1.0};
  double check_budget_ms = std::numeric_limits<double>::infinity();
  FeasibleSet feasible = FeasibleSet::Simplex;
};

struct ExperimentSpec {
  std::size_t repetitions = 100;
  std::size_t horizon = 50;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0: one per hardware thread
  std::vector<double> thresholds_ms;
};

struct BenchSpec {
  std::vector<std::size_t> m{9};
  std::vector<std::size_t> lengths{5, 10, 15};
  std::vector<std::size_t> widths{5};
  std::size_t repeats = 5;
};

struct ExperimentConfig {
  GridSpec grid;
  ModelSpec model;
  std::vector<Event> events;
  MechanismSpec mechanism;
  PrivacySpec privacy;
  ExperimentSpec experiment;
  BenchSpec bench;
};

// Relative paths inside the document resolve against base_dir. Any problem
// raises ConfigError with the source name (and line, for syntax errors).
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                              const std::string& source_name = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

// Session settings for one point of the experiment grid.
SessionConfig session_config(const ExperimentConfig& config, double epsilon, double alpha,
                             double delta);

}  // namespace stp
