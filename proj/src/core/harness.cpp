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

#include "harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "error.hpp"
#include "ingest.hpp"
#include "markov_io.hpp"
#include "oracle.hpp"
#include "sampling.hpp"

namespace stp {
namespace {

// Salt separating trajectory sampling from the session's own draws.
constexpr std::uint64_t kTrajectoryStream = 0x7472616aULL;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream out;
  out << std::setprecision(12) << v;
  return out.str();
}

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(n, jobs));
}

// Calls fn(i) for i in [0, n) on a small pool; results must be written by
// index so the fold stays deterministic.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  const std::size_t workers = worker_count(threads, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

PointReport aggregate(std::vector<RunSummary> runs, std::size_t horizon) {
  PointReport p;
  const auto n = static_cast<double>(runs.size());
  p.alpha_mean.assign(horizon, 0.0);
  p.alpha_std.assign(horizon, 0.0);
  p.distance_mean.assign(horizon, 0.0);
  std::vector<std::size_t> counts(horizon, 0);
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < r.alpha.size() && t < horizon; ++t) {
      p.alpha_mean[t] += r.alpha[t];
      p.distance_mean[t] += r.distance_km[t];
      ++counts[t];
    }
    for (std::size_t h : r.halvings_per_t) ++p.halvings_histogram[h];
    p.mean_alpha += r.mean_alpha / n;
    p.mean_distance_km += r.mean_distance_km / n;
    p.unknown_verdicts += r.unknown_verdicts;
    p.timed_out_verdicts += r.timed_out_verdicts;
    p.conservative_releases += r.conservative_releases;
    p.forced_releases += r.forced_releases;
    p.mean_runtime_ms += r.runtime_ms / n;
  }
  for (std::size_t t = 0; t < horizon; ++t) {
    if (counts[t] == 0) continue;
    p.alpha_mean[t] /= static_cast<double>(counts[t]);
    p.distance_mean[t] /= static_cast<double>(counts[t]);
  }
  for (const auto& r : runs) {
    for (std::size_t t = 0; t < r.alpha.size() && t < horizon; ++t) {
      const double d = r.alpha[t] - p.alpha_mean[t];
      p.alpha_std[t] += d * d;
    }
    const double d = r.runtime_ms - p.mean_runtime_ms;
    p.std_runtime_ms += d * d;
  }
  for (std::size_t t = 0; t < horizon; ++t) {
    p.alpha_std[t] = counts[t] > 1 ? std::sqrt(p.alpha_std[t] / static_cast<double>(counts[t] - 1)) : 0.0;
  }
  p.std_runtime_ms = runs.size() > 1 ? std::sqrt(p.std_runtime_ms / (n - 1.0)) : 0.0;
  p.runs = std::move(runs);
  return p;
}

std::vector<RunSummary> run_point(const ExperimentConfig& config, const Scenario& scenario,
                                  const SessionConfig& session,
                                  const std::shared_ptr<PlanarLaplaceCache>& cache) {
  std::vector<RunSummary> runs(config.experiment.repetitions);
  parallel_for(runs.size(), config.experiment.threads,
               [&](std::size_t r) { runs[r] = run_once(scenario, session, r, cache); });
  return runs;
}

}  // namespace

Scenario build_scenario(const ExperimentConfig& config) {
  Scenario s{config.grid.make(), nullptr, config.events, {}, 0};
  const std::size_t m = s.map.size();
  switch (config.model.source) {
    case ModelSource::Synth:
      s.model = std::make_shared<const MarkovModel>(
          synth_gaussian(config.grid.rows, config.grid.cols, config.model.sigma));
      break;
    case ModelSource::Train: {
      auto data = ingest_trajectories(config.model.trajectories, s.map,
                                      config.model.resample_seconds);
      s.dropped_rows = data.dropped_rows;
      s.model = std::make_shared<const MarkovModel>(
          train(data.trajectories, m, config.model.smoothing));
      for (auto& traj : data.trajectories) {
        if (traj.size() < config.experiment.horizon) continue;
        traj.cells.resize(config.experiment.horizon);
        s.trajectories.push_back(std::move(traj));
      }
      break;
    }
    case ModelSource::File: {
      auto file = load_model(config.model.path);
      require(file.model.states() == m, ErrorCode::ConfigError,
              config.model.path.string() + ": model has " +
                  std::to_string(file.model.states()) + " states, grid has " +
                  std::to_string(m));
      s.model = std::make_shared<const MarkovModel>(std::move(file.model));
      break;
    }
  }
  require(s.model->max_horizon() >= config.experiment.horizon, ErrorCode::ConfigError,
          "model does not cover the experiment horizon");
  return s;
}

RunSummary run_once(const Scenario& scenario, const SessionConfig& session, std::size_t run,
                    const std::shared_ptr<PlanarLaplaceCache>& cache) {
  using Clock = std::chrono::steady_clock;
  RunSummary out;
  out.run = run;
  out.seed = mix_seed(session.seed, run);
  const Trajectory traj =
      scenario.trajectories.empty()
          ? sample_trajectory(*scenario.model, Distribution::uniform(scenario.map.size()),
                              session.horizon, mix_seed(out.seed, kTrajectoryStream))
          : scenario.trajectories[run % scenario.trajectories.size()];

  SessionConfig cfg = session;
  cfg.seed = out.seed;
  const auto t0 = Clock::now();
  ReleaseSession sess(scenario.map, scenario.model, scenario.events, cfg, cache);
  const auto records = run_session(sess, traj);
  out.runtime_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

  for (const auto& r : records) {
    out.alpha.push_back(r.alpha_used);
    out.distance_km.push_back(r.distance_km);
    out.halvings_per_t.push_back(r.halvings);
    out.halvings += r.halvings;
    out.unknown_verdicts += r.unknown_verdicts;
    out.timed_out_verdicts += r.timed_out_verdicts;
    if (r.unknown_verdicts > 0) ++out.conservative_releases;
    if (r.forced_uniform) ++out.forced_releases;
    out.check_ms += r.check_ms;
  }
  const auto n = static_cast<double>(std::max<std::size_t>(records.size(), 1));
  out.mean_alpha = std::accumulate(out.alpha.begin(), out.alpha.end(), 0.0) / n;
  out.mean_distance_km = std::accumulate(out.distance_km.begin(), out.distance_km.end(), 0.0) / n;
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  return run_experiment(config, build_scenario(config));
}

ExperimentReport run_experiment(const ExperimentConfig& config, const Scenario& scenario) {
  ExperimentReport report;
  report.repetitions = config.experiment.repetitions;
  report.horizon = config.experiment.horizon;
  report.seed = config.experiment.seed;
  auto cache = std::make_shared<PlanarLaplaceCache>(scenario.map, config.mechanism.subsamples);
  // delta only matters for the location-set mechanism.
  const std::vector<double> deltas =
      config.mechanism.kind == MechanismKind::PlanarLaplaceDeltaSet
          ? config.mechanism.delta
          : std::vector<double>{config.mechanism.delta.front()};
  for (double eps : config.privacy.epsilon) {
    for (double alpha : config.mechanism.alpha) {
      for (double delta : deltas) {
        const SessionConfig session = session_config(config, eps, alpha, delta);
        PointReport p = aggregate(run_point(config, scenario, session, cache), report.horizon);
        p.epsilon = eps;
        p.alpha = alpha;
        p.delta = delta;
        p.check_budget_ms = session.check_budget_ms;
        report.points.push_back(std::move(p));
      }
    }
  }
  return report;
}

std::vector<SweepRow> run_threshold_sweep(const ExperimentConfig& config,
                                          const std::vector<double>& thresholds_ms) {
  return run_threshold_sweep(config, build_scenario(config), thresholds_ms);
}

std::vector<SweepRow> run_threshold_sweep(const ExperimentConfig& config,
                                          const Scenario& scenario,
                                          const std::vector<double>& thresholds_ms) {
  require(!thresholds_ms.empty(), ErrorCode::ConfigError, "no thresholds given");
  auto cache = std::make_shared<PlanarLaplaceCache>(scenario.map, config.mechanism.subsamples);
  std::vector<SweepRow> rows;
  for (double threshold : thresholds_ms) {
    require(threshold > 0.0, ErrorCode::ConfigError, "thresholds must be positive");
    SessionConfig session =
        session_config(config, config.privacy.epsilon.front(), config.mechanism.alpha.front(),
                       config.mechanism.delta.front());
    session.check_budget_ms = threshold;
    const PointReport p =
        aggregate(run_point(config, scenario, session, cache), config.experiment.horizon);
    rows.push_back({threshold, p.mean_runtime_ms, p.conservative_releases, p.unknown_verdicts,
                    p.timed_out_verdicts, p.mean_alpha, p.mean_distance_km});
  }
  return rows;
}

BenchInstance make_bench_instance(std::size_t m, std::size_t length, std::size_t width,
                                  std::uint64_t seed) {
  require(m >= 1 && length >= 1 && width >= 1 && width <= m, ErrorCode::InvalidArgument,
          "bench instance needs 1 <= width <= m and length >= 1");
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  const auto n = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd mat(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) mat(i, j) = unif(rng);
    mat.row(i) /= mat.row(i).sum();
  }
  std::vector<RegionMask> regions;
  std::vector<std::size_t> cells(m);
  for (std::size_t k = 0; k < length; ++k) {
    std::iota(cells.begin(), cells.end(), 0);
    std::shuffle(cells.begin(), cells.end(), rng);
    regions.push_back(RegionMask::from_cells(
        m, std::vector<std::size_t>(cells.begin(), cells.begin() + static_cast<long>(width))));
  }
  std::vector<EmissionColumn> emissions;
  for (std::size_t k = 0; k < length; ++k) {
    Eigen::VectorXd col(n);
    for (Eigen::Index i = 0; i < n; ++i) col(i) = unif(rng);
    emissions.push_back({col});
  }
  return {std::make_shared<const MarkovModel>(std::move(mat)),
          Event::pattern(std::move(regions), 1), Distribution::uniform(m),
          std::move(emissions)};
}

std::vector<BenchRow> run_scaling_bench(const std::vector<std::size_t>& m_grid,
                                        const std::vector<std::size_t>& length_grid,
                                        const std::vector<std::size_t>& width_grid,
                                        std::size_t repeats, std::uint64_t seed) {
  std::vector<BenchRow> rows;
  std::uint64_t counter = 0;
  for (std::size_t m : m_grid) {
    for (std::size_t length : length_grid) {
      for (std::size_t width : width_grid) {
        if (width > m) continue;
        const auto inst = make_bench_instance(m, length, width, mix_seed(seed, counter++));
        BenchRow row{m, length, width, 0.0, std::nullopt};
        const double count = std::pow(static_cast<double>(m), static_cast<double>(length));
        if (count <= kEnumerationLimit) {
          const auto timing = bench_pair(inst, repeats);
          row.fast_ns = timing.fast_ns;
          row.naive_ns = timing.naive_ns;
        } else {
          row.fast_ns = time_fast_path(inst, repeats);
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json doc;
  doc["repetitions"] = report.repetitions;
  doc["horizon"] = report.horizon;
  doc["seed"] = report.seed;
  doc["points"] = nlohmann::json::array();
  for (const auto& p : report.points) {
    nlohmann::json j;
    j["epsilon"] = p.epsilon;
    j["alpha"] = p.alpha;
    j["delta"] = p.delta;
    j["check_budget_ms"] = num(p.check_budget_ms);
    j["mean_alpha"] = p.mean_alpha;
    j["mean_distance_km"] = p.mean_distance_km;
    j["alpha_mean_per_t"] = p.alpha_mean;
    j["alpha_std_per_t"] = p.alpha_std;
    j["distance_mean_per_t"] = p.distance_mean;
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [h, c] : p.halvings_histogram) hist[std::to_string(h)] = c;
    j["halvings_histogram"] = hist;
    j["unknown_verdicts"] = p.unknown_verdicts;
    j["timed_out_verdicts"] = p.timed_out_verdicts;
    j["conservative_releases"] = p.conservative_releases;
    j["forced_releases"] = p.forced_releases;
    j["mean_runtime_ms"] = p.mean_runtime_ms;
    j["std_runtime_ms"] = p.std_runtime_ms;
    doc["points"].push_back(std::move(j));
  }
  return doc;
}

nlohmann::json sweep_to_json(const std::vector<SweepRow>& rows) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rows) {
    doc.push_back({{"threshold_ms", num(r.threshold_ms)},
                   {"mean_runtime_ms", r.mean_runtime_ms},
                   {"conservative_releases", r.conservative_releases},
                   {"unknown_verdicts", r.unknown_verdicts},
                   {"timed_out_verdicts", r.timed_out_verdicts},
                   {"mean_alpha", r.mean_alpha},
                   {"mean_distance_km", r.mean_distance_km}});
  }
  return doc;
}

nlohmann::json bench_to_json(const std::vector<BenchRow>& rows) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j{{"m", r.m}, {"length", r.length}, {"width", r.width}, {"fast_ns", r.fast_ns}};
    j["naive_ns"] = r.naive_ns ? nlohmann::json(*r.naive_ns) : nlohmann::json(nullptr);
    doc.push_back(std::move(j));
  }
  return doc;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

void write_per_timestamp_csv(const std::filesystem::path& path, const ExperimentReport& report) {
  auto out = open_out(path);
  out << "epsilon,alpha0,delta,t,alpha_mean,alpha_std,dist_mean_km\n";
  for (const auto& p : report.points) {
    for (std::size_t t = 0; t < p.alpha_mean.size(); ++t) {
      out << fmt(p.epsilon) << ',' << fmt(p.alpha) << ',' << fmt(p.delta) << ',' << t + 1 << ','
          << fmt(p.alpha_mean[t]) << ',' << fmt(p.alpha_std[t]) << ','
          << fmt(p.distance_mean[t]) << '\n';
    }
  }
}

void write_per_run_csv(const std::filesystem::path& path, const ExperimentReport& report) {
  auto out = open_out(path);
  out << "epsilon,alpha0,delta,run,seed,mean_alpha,mean_dist_km,halvings,unknown_verdicts,"
         "conservative_releases,forced_releases,runtime_ms\n";
  for (const auto& p : report.points) {
    for (const auto& r : p.runs) {
      out << fmt(p.epsilon) << ',' << fmt(p.alpha) << ',' << fmt(p.delta) << ',' << r.run << ','
          << r.seed << ',' << fmt(r.mean_alpha) << ',' << fmt(r.mean_distance_km) << ','
          << r.halvings << ',' << r.unknown_verdicts << ',' << r.conservative_releases << ','
          << r.forced_releases << ',' << fmt(r.runtime_ms) << '\n';
    }
  }
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "threshold_ms,mean_runtime_ms,conservative_releases,unknown_verdicts,"
         "timed_out_verdicts,mean_alpha,mean_dist_km\n";
  for (const auto& r : rows) {
    out << fmt(r.threshold_ms) << ',' << fmt(r.mean_runtime_ms) << ','
        << r.conservative_releases << ',' << r.unknown_verdicts << ',' << r.timed_out_verdicts
        << ',' << fmt(r.mean_alpha) << ',' << fmt(r.mean_distance_km) << '\n';
  }
}

void write_bench_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
  auto out = open_out(path);
  out << "m,length,width,fast_ns,naive_ns\n";
  for (const auto& r : rows) {
    out << r.m << ',' << r.length << ',' << r.width << ',' << fmt(r.fast_ns) << ','
        << (r.naive_ns ? fmt(*r.naive_ns) : std::string()) << '\n';
  }
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<ReleaseRecord>& records) {
  auto out = open_out(path);
  out << "t,true_cell,obs_cell,alpha,halvings,dist_km\n";
  for (const auto& r : records) {
    out << r.t << ',' << r.true_cell.value << ',' << r.observed_cell.value << ','
        << fmt(r.alpha_used) << ',' << r.halvings << ',' << fmt(r.distance_km) << '\n';
  }
}

}  // namespace stp
