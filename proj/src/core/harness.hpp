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
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include <json.hpp>

#include "config.hpp"
#include "markov.hpp"
#include "oracle.hpp"
#include "priste.hpp"

namespace stp {

// Everything a run needs besides the per-point parameters.
struct Scenario {
  GridMap map;
  std::shared_ptr<const MarkovModel> model;
  std::vector<Event> events;
  // Empty: each run samples its own trajectory from the model.
  std::vector<Trajectory> trajectories;
  std::size_t dropped_rows = 0;
};

Scenario build_scenario(const ExperimentConfig& config);

struct RunSummary {
  std::size_t run = 0;
  std::uint64_t seed = 0;
  double mean_alpha = 0.0;
  double mean_distance_km = 0.0;
  std::size_t halvings = 0;
  std::size_t unknown_verdicts = 0;
  std::size_t timed_out_verdicts = 0;
  std::size_t conservative_releases = 0;
  std::size_t forced_releases = 0;
  double runtime_ms = 0.0;
  double check_ms = 0.0;
  std::vector<double> alpha;        // per timestamp
  std::vector<double> distance_km;  // per timestamp
  std::vector<std::size_t> halvings_per_t;
};

struct PointReport {
  double epsilon = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  double check_budget_ms = 0.0;
  std::vector<double> alpha_mean;  // per timestamp
  std::vector<double> alpha_std;
  std::vector<double> distance_mean;
  double mean_alpha = 0.0;
  double mean_distance_km = 0.0;
  std::map<std::size_t, std::size_t> halvings_histogram;
  std::size_t unknown_verdicts = 0;
  std::size_t timed_out_verdicts = 0;
  // Timestamps where an undecided check forced a retry.
  std::size_t conservative_releases = 0;
  std::size_t forced_releases = 0;
  double mean_runtime_ms = 0.0;
  double std_runtime_ms = 0.0;
  std::vector<RunSummary> runs;
};

struct ExperimentReport {
  std::size_t repetitions = 0;
  std::size_t horizon = 0;
  std::uint64_t seed = 0;
  std::vector<PointReport> points;
};

// One session over the run's trajectory; run seeds come from
// mix_seed(master, run).
RunSummary run_once(const Scenario& scenario, const SessionConfig& session, std::size_t run,
                    const std::shared_ptr<PlanarLaplaceCache>& cache);

// Runs every (epsilon, alpha, delta) combination of the config grid.
ExperimentReport run_experiment(const ExperimentConfig& config);
ExperimentReport run_experiment(const ExperimentConfig& config, const Scenario& scenario);

struct SweepRow {
  double threshold_ms = 0.0;
  double mean_runtime_ms = 0.0;
  std::size_t conservative_releases = 0;
  std::size_t unknown_verdicts = 0;
  std::size_t timed_out_verdicts = 0;
  double mean_alpha = 0.0;
  double mean_distance_km = 0.0;
};

// Uses the first epsilon/alpha/delta of the config for every threshold.
std::vector<SweepRow> run_threshold_sweep(const ExperimentConfig& config,
                                          const std::vector<double>& thresholds_ms);
std::vector<SweepRow> run_threshold_sweep(const ExperimentConfig& config,
                                          const Scenario& scenario,
                                          const std::vector<double>& thresholds_ms);

struct BenchRow {
  std::size_t m = 0;
  std::size_t length = 0;
  std::size_t width = 0;
  double fast_ns = 0.0;
  std::optional<double> naive_ns;  // absent when enumeration is too large
};

// Random PATTERN instance with `length` window steps, each region holding
// `width` cells, starting at t = 1.
BenchInstance make_bench_instance(std::size_t m, std::size_t length, std::size_t width,
                                  std::uint64_t seed);

// Rows with width > m are skipped. Fast and naive results are checked for
// agreement before anything is timed.
std::vector<BenchRow> run_scaling_bench(const std::vector<std::size_t>& m_grid,
                                        const std::vector<std::size_t>& length_grid,
                                        const std::vector<std::size_t>& width_grid,
                                        std::size_t repeats, std::uint64_t seed);

nlohmann::json report_to_json(const ExperimentReport& report);
nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows);
nlohmann::json bench_to_json(const std::vector<BenchRow>& rows);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
void write_per_timestamp_csv(const std::filesystem::path& path, const ExperimentReport& report);
void write_per_run_csv(const std::filesystem::path& path, const ExperimentReport& report);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);
void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);
void write_records_csv(const std::filesystem::path& path,
                       const std::vector<ReleaseRecord>& records);

}  // namespace stp
