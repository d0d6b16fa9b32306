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

#include "stprivacy/stprivacy.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "checker.hpp"
#include "config.hpp"
#include "error.hpp"
#include "events.hpp"
#include "harness.hpp"
#include "ingest.hpp"
#include "lppm.hpp"
#include "markov.hpp"
#include "markov_io.hpp"
#include "priste.hpp"
#include "statespace.hpp"
#include "twoworld.hpp"

struct stp_grid {
  stp::GridMap map;
};

struct stp_model {
  std::shared_ptr<const stp::MarkovModel> model;
  std::optional<stp::Distribution> pi;
};

struct stp_events {
  std::vector<stp::Event> events;
  std::size_t m;
};

struct stp_trajectories {
  std::vector<stp::Trajectory> trajectories;
};

struct stp_session {
  std::unique_ptr<stp::ReleaseSession> session;
};

struct stp_config {
  stp::ExperimentConfig config;
};

namespace {

thread_local std::string g_last_error;

stp_status to_status(stp::ErrorCode code) {
  using stp::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument:
      return STP_ERR_INVALID_ARGUMENT;
    case ErrorCode::OutOfBounds:
      return STP_ERR_OUT_OF_BOUNDS;
    case ErrorCode::EmptyCorpus:
      return STP_ERR_EMPTY_CORPUS;
    case ErrorCode::TimestampOutOfRange:
      return STP_ERR_TIMESTAMP_OUT_OF_RANGE;
    case ErrorCode::WindowOutOfRange:
      return STP_ERR_WINDOW_OUT_OF_RANGE;
    case ErrorCode::HorizonExceeded:
      return STP_ERR_HORIZON_EXCEEDED;
    case ErrorCode::OutOfOrder:
      return STP_ERR_OUT_OF_ORDER;
    case ErrorCode::TooLarge:
      return STP_ERR_TOO_LARGE;
    case ErrorCode::DegenerateEvent:
      return STP_ERR_DEGENERATE_EVENT;
    case ErrorCode::DegeneratePrior:
      return STP_ERR_DEGENERATE_PRIOR;
    case ErrorCode::EmptySet:
      return STP_ERR_EMPTY_SET;
    case ErrorCode::ZeroLikelihood:
      return STP_ERR_ZERO_LIKELIHOOD;
    case ErrorCode::ParseError:
      return STP_ERR_PARSE;
    case ErrorCode::EmptyAfterFilter:
      return STP_ERR_EMPTY_AFTER_FILTER;
    case ErrorCode::ConfigError:
      return STP_ERR_CONFIG;
    case ErrorCode::IoError:
      return STP_ERR_IO;
  }
  return STP_ERR_INTERNAL;
}

// Runs fn, translating exceptions into a status plus thread-local message.
template <typename Fn>
stp_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return STP_OK;
  } catch (const stp::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return STP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return STP_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  stp::require(p != nullptr, stp::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const nlohmann::json& doc) {
  if (out) *out = dup_string(doc.dump(2));
}

double budget(double ms) {
  return ms > 0.0 ? ms : std::numeric_limits<double>::infinity();
}

nlohmann::json verdict_json(const stp::CheckVerdict& v) {
  nlohmann::json j;
  if (const auto* c = std::get_if<stp::Certified>(&v)) {
    j["verdict"] = "certified";
    j["upper"] = c->upper;
  } else if (const auto* r = std::get_if<stp::Refuted>(&v)) {
    j["verdict"] = "refuted";
    j["margin"] = r->margin;
    j["witness"] = std::vector<double>(r->witness.data(), r->witness.data() + r->witness.size());
  } else {
    const auto& u = std::get<stp::Unknown>(v);
    j["verdict"] = "unknown";
    j["lower"] = u.lower;
    j["upper"] = std::isfinite(u.upper) ? nlohmann::json(u.upper) : nlohmann::json("inf");
    j["timed_out"] = u.timed_out;
  }
  return j;
}

const char* kStatusNames[] = {
    "ok",           "invalid_argument", "out_of_bounds",    "empty_corpus",
    "timestamp_out_of_range", "window_out_of_range", "horizon_exceeded", "out_of_order",
    "too_large",    "degenerate_event", "degenerate_prior", "empty_set",
    "zero_likelihood", "parse_error",   "empty_after_filter", "config_error",
    "io_error"};

}  // namespace

extern "C" {

const char* stp_version(void) { return "0.1.0"; }

const char* stp_last_error(void) { return g_last_error.c_str(); }

const char* stp_status_name(stp_status status) {
  const auto i = static_cast<std::size_t>(status);
  if (i < sizeof(kStatusNames) / sizeof(kStatusNames[0])) return kStatusNames[i];
  return "internal_error";
}

void stp_string_free(char* s) { std::free(s); }

stp_status stp_grid_create(size_t rows, size_t cols, double cell_size_m, double origin_lat,
                           double origin_lon, stp_grid** out) {
  return guarded([&] {
    need(out, "out");
    *out = new stp_grid{stp::GridMap(rows, cols, cell_size_m, {origin_lat, origin_lon})};
  });
}

void stp_grid_free(stp_grid* grid) { delete grid; }

size_t stp_grid_cells(const stp_grid* grid) { return grid ? grid->map.size() : 0; }

stp_status stp_grid_locate(const stp_grid* grid, double lat, double lon, size_t* cell) {
  return guarded([&] {
    need(grid, "grid");
    need(cell, "cell");
    *cell = stp::locate(grid->map, lat, lon).value;
  });
}

stp_status stp_grid_distance_km(const stp_grid* grid, size_t a, size_t b, double* km) {
  return guarded([&] {
    need(grid, "grid");
    need(km, "km");
    stp::require(a < grid->map.size() && b < grid->map.size(), stp::ErrorCode::OutOfBounds,
                 "cell index outside the grid");
    *km = stp::euclidean_km(grid->map, {a}, {b});
  });
}

stp_status stp_model_from_matrix(size_t m, const double* row_major, stp_model** out) {
  return guarded([&] {
    need(row_major, "matrix");
    need(out, "out");
    stp::require(m > 0, stp::ErrorCode::InvalidArgument, "m must be positive");
    const auto n = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd mat(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) mat(i, j) = row_major[i * n + j];
    }
    *out = new stp_model{std::make_shared<const stp::MarkovModel>(std::move(mat)), std::nullopt};
  });
}

stp_status stp_model_synth(size_t rows, size_t cols, double sigma, stp_model** out) {
  return guarded([&] {
    need(out, "out");
    *out = new stp_model{
        std::make_shared<const stp::MarkovModel>(stp::synth_gaussian(rows, cols, sigma)),
        std::nullopt};
  });
}

stp_status stp_model_train(const stp_trajectories* trajectories, size_t m, double smoothing,
                           stp_model** out) {
  return guarded([&] {
    need(trajectories, "trajectories");
    need(out, "out");
    *out = new stp_model{std::make_shared<const stp::MarkovModel>(
                             stp::train(trajectories->trajectories, m, smoothing)),
                         std::nullopt};
  });
}

stp_status stp_model_load(const char* path, stp_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto file = stp::load_model(path);
    *out = new stp_model{std::make_shared<const stp::MarkovModel>(std::move(file.model)),
                         std::move(file.pi)};
  });
}

stp_status stp_model_save(const stp_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    stp::save_model(path, *model->model, model->pi);
  });
}

void stp_model_free(stp_model* model) { delete model; }

size_t stp_model_states(const stp_model* model) { return model ? model->model->states() : 0; }

stp_status stp_trajectories_load(const char* path, const stp_grid* grid,
                                 double resample_seconds, stp_trajectories** out,
                                 size_t* dropped_rows) {
  return guarded([&] {
    need(path, "path");
    need(grid, "grid");
    need(out, "out");
    auto result = stp::ingest_trajectories(path, grid->map, resample_seconds);
    if (dropped_rows) *dropped_rows = result.dropped_rows;
    *out = new stp_trajectories{std::move(result.trajectories)};
  });
}

void stp_trajectories_free(stp_trajectories* trajectories) { delete trajectories; }

size_t stp_trajectories_count(const stp_trajectories* trajectories) {
  return trajectories ? trajectories->trajectories.size() : 0;
}

size_t stp_trajectory_length(const stp_trajectories* trajectories, size_t index) {
  if (!trajectories || index >= trajectories->trajectories.size()) return 0;
  return trajectories->trajectories[index].size();
}

stp_status stp_trajectory_cells(const stp_trajectories* trajectories, size_t index,
                                size_t* cells, size_t cap) {
  return guarded([&] {
    need(trajectories, "trajectories");
    need(cells, "cells");
    stp::require(index < trajectories->trajectories.size(), stp::ErrorCode::OutOfBounds,
                 "trajectory index out of range");
    const auto& traj = trajectories->trajectories[index];
    for (std::size_t i = 0; i < traj.size() && i < cap; ++i) cells[i] = traj.cells[i].value;
  });
}

stp_status stp_events_parse(const char* json, size_t m, stp_events** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      stp::fail(stp::ErrorCode::ParseError, std::string("events: ") + e.what());
    }
    *out = new stp_events{stp::events_from_json(doc, m), m};
  });
}

stp_status stp_events_load(const char* path, size_t m, stp_events** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    std::ifstream in(path);
    stp::require(static_cast<bool>(in), stp::ErrorCode::IoError,
                 std::string("cannot open ") + path);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      stp::fail(stp::ErrorCode::ParseError, std::string(path) + ": " + e.what());
    }
    *out = new stp_events{stp::events_from_json(doc, m), m};
  });
}

void stp_events_free(stp_events* events) { delete events; }

size_t stp_events_count(const stp_events* events) { return events ? events->events.size() : 0; }

stp_status stp_prior(const stp_model* model, const stp_events* events, size_t index,
                     const double* pi, double* out) {
  return guarded([&] {
    need(model, "model");
    need(events, "events");
    need(pi, "pi");
    need(out, "out");
    stp::require(index < events->events.size(), stp::ErrorCode::OutOfBounds,
                 "event index out of range");
    const std::size_t m = model->model->states();
    const stp::Distribution dist(Eigen::Map<const Eigen::VectorXd>(pi, static_cast<Eigen::Index>(m)));
    const auto& e = events->events[index];
    const stp::AugmentedChain chain(e, model->model, e.end());
    *out = stp::prior(chain, dist);
  });
}

stp_status stp_plm_matrix(const stp_grid* grid, double alpha, size_t subsamples, double* out) {
  return guarded([&] {
    need(grid, "grid");
    need(out, "out");
    const auto mat = stp::planar_laplace_matrix(grid->map, {alpha, subsamples});
    const auto n = static_cast<Eigen::Index>(mat.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) out[i * n + j] = mat.probs()(i, j);
    }
  });
}

stp_status stp_quantify(const stp_model* model, const stp_events* events,
                        const double* emissions, size_t t, const double* pi, double epsilon,
                        double budget_ms, int box_constraints, char** out_json) {
  return guarded([&] {
    need(model, "model");
    need(events, "events");
    need(out_json, "out_json");
    stp::require(t == 0 || emissions != nullptr, stp::ErrorCode::InvalidArgument,
                 "emissions is null");
    const std::size_t m = model->model->states();
    const auto n = static_cast<Eigen::Index>(m);
    std::vector<stp::EmissionColumn> cols;
    for (std::size_t k = 0; k < t; ++k) {
      cols.push_back({Eigen::Map<const Eigen::VectorXd>(emissions + k * m, n)});
    }
    std::optional<stp::Distribution> dist;
    if (pi) dist.emplace(Eigen::Map<const Eigen::VectorXd>(pi, n));

    stp::CertifyOptions opts;
    opts.budget_ms = budget(budget_ms);
    opts.feasible = box_constraints ? stp::FeasibleSet::Box : stp::FeasibleSet::Simplex;

    nlohmann::json doc;
    doc["epsilon"] = epsilon;
    doc["observations"] = t;
    doc["events"] = nlohmann::json::array();
    bool all = true;
    for (std::size_t k = 0; k < events->events.size(); ++k) {
      const auto& e = events->events[k];
      const stp::AugmentedChain chain(e, model->model, std::max(t, e.end()));
      stp::CheckVectors cv(chain);
      nlohmann::json ev = stp::event_to_json(e);
      ev["index"] = k;
      ev["steps"] = nlohmann::json::array();
      bool certified = true;
      for (std::size_t s = 0; s < t; ++s) {
        cv = stp::advance(std::move(cv), chain, s + 1, cols[s]);
        const auto conds = stp::build_conditions(cv, {epsilon});
        nlohmann::json step{{"t", s + 1}};
        if (conds.forward.degenerate) {
          step["verdict"] = "degenerate";
        } else {
          const auto f = stp::certify(conds.forward, opts);
          const auto b = stp::certify(conds.backward, opts);
          certified = certified && stp::is_certified(f) && stp::is_certified(b);
          step["forward"] = verdict_json(f);
          step["backward"] = verdict_json(b);
        }
        ev["steps"].push_back(std::move(step));
      }
      ev["certified"] = certified;
      all = all && certified;
      if (dist) {
        try {
          const auto r = stp::quantify_fixed_pi(chain, *dist, cols, epsilon);
          ev["fixed_pi"] = {{"prior", r.prior},
                            {"ratio_fwd", std::isfinite(r.ratio_fwd) ? nlohmann::json(r.ratio_fwd)
                                                                     : nlohmann::json("inf")},
                            {"ratio_bwd", std::isfinite(r.ratio_bwd) ? nlohmann::json(r.ratio_bwd)
                                                                     : nlohmann::json("inf")},
                            {"holds", r.holds}};
        } catch (const stp::Error& err) {
          ev["fixed_pi"] = {{"error", stp::to_string(err.code())}, {"message", err.what()}};
        }
      }
      doc["events"].push_back(std::move(ev));
    }
    doc["certified"] = all;
    emit(out_json, doc);
  });
}

void stp_session_params_default(stp_session_params* params) {
  if (!params) return;
  const stp::SessionConfig d;
  params->epsilon = d.epsilon;
  params->mechanism = STP_MECH_PLM;
  params->initial_alpha = d.initial_alpha;
  params->decay = d.decay;
  params->delta = d.delta;
  params->subsamples = d.subsamples;
  params->check_budget_ms = 0.0;
  params->max_halvings = d.max_halvings;
  params->horizon = d.horizon;
  params->seed = d.seed;
  params->box_constraints = 0;
}

stp_status stp_session_create(const stp_grid* grid, const stp_model* model,
                              const stp_events* events, const stp_session_params* params,
                              stp_session** out) {
  return guarded([&] {
    need(grid, "grid");
    need(model, "model");
    need(events, "events");
    need(params, "params");
    need(out, "out");
    stp::SessionConfig cfg;
    cfg.epsilon = params->epsilon;
    switch (params->mechanism) {
      case STP_MECH_PLM:
        cfg.mechanism = stp::MechanismKind::PlanarLaplace;
        break;
      case STP_MECH_PLM_DELTASET:
        cfg.mechanism = stp::MechanismKind::PlanarLaplaceDeltaSet;
        break;
      case STP_MECH_UNIFORM:
        cfg.mechanism = stp::MechanismKind::Uniform;
        break;
      default:
        stp::fail(stp::ErrorCode::InvalidArgument, "unknown mechanism");
    }
    cfg.initial_alpha = params->initial_alpha;
    cfg.decay = params->decay;
    cfg.delta = params->delta;
    cfg.subsamples = params->subsamples;
    cfg.check_budget_ms = budget(params->check_budget_ms);
    cfg.max_halvings = params->max_halvings;
    cfg.horizon = params->horizon;
    cfg.seed = params->seed;
    cfg.feasible = params->box_constraints ? stp::FeasibleSet::Box : stp::FeasibleSet::Simplex;
    *out = new stp_session{std::make_unique<stp::ReleaseSession>(grid->map, model->model,
                                                                 events->events, cfg)};
  });
}

stp_status stp_session_step(stp_session* session, size_t true_cell, stp_release_record* record) {
  return guarded([&] {
    need(session, "session");
    const auto r = session->session->step({true_cell});
    if (record) {
      record->t = r.t;
      record->true_cell = r.true_cell.value;
      record->obs_cell = r.observed_cell.value;
      record->alpha = r.alpha_used;
      record->halvings = r.halvings;
      record->dist_km = r.distance_km;
      record->forced_uniform = r.forced_uniform ? 1 : 0;
      record->unknown_verdicts = r.unknown_verdicts;
    }
  });
}

void stp_session_free(stp_session* session) { delete session; }

stp_status stp_config_load(const char* path, stp_config** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = new stp_config{stp::load_config(path)};
  });
}

void stp_config_free(stp_config* config) { delete config; }

void stp_config_set_seed(stp_config* config, uint64_t seed) {
  if (config) config->config.experiment.seed = seed;
}

size_t stp_config_cells(const stp_config* config) {
  return config ? config->config.grid.rows * config->config.grid.cols : 0;
}

stp_status stp_config_grid(const stp_config* config, stp_grid** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = new stp_grid{config->config.grid.make()};
  });
}

stp_status stp_config_model(const stp_config* config, stp_model** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    auto scenario = stp::build_scenario(config->config);
    *out = new stp_model{std::move(scenario.model), std::nullopt};
  });
}

stp_status stp_config_events(const stp_config* config, stp_events** out) {
  return guarded([&] {
    need(config, "config");
    need(out, "out");
    *out = new stp_events{config->config.events, stp_config_cells(config)};
  });
}

stp_status stp_run_experiment(const stp_config* config, const char* out_dir,
                              char** summary_json) {
  return guarded([&] {
    need(config, "config");
    need(out_dir, "out_dir");
    const std::filesystem::path dir(out_dir);
    const auto scenario = stp::build_scenario(config->config);
    const auto report = stp::run_experiment(config->config, scenario);
    auto doc = stp::report_to_json(report);
    doc["dropped_rows"] = scenario.dropped_rows;
    stp::write_json(dir / "report.json", doc);
    stp::write_per_timestamp_csv(dir / "per_timestamp.csv", report);
    stp::write_per_run_csv(dir / "per_run.csv", report);
    emit(summary_json, doc);
  });
}

stp_status stp_run_threshold_sweep(const stp_config* config, const double* thresholds,
                                   size_t count, const char* out_dir, char** summary_json) {
  return guarded([&] {
    need(config, "config");
    need(out_dir, "out_dir");
    std::vector<double> ts = thresholds ? std::vector<double>(thresholds, thresholds + count)
                                        : config->config.experiment.thresholds_ms;
    for (double& t : ts) {
      if (t <= 0.0) t = std::numeric_limits<double>::infinity();
    }
    const std::filesystem::path dir(out_dir);
    const auto rows = stp::run_threshold_sweep(config->config, ts);
    nlohmann::json doc{{"repetitions", config->config.experiment.repetitions},
                       {"seed", config->config.experiment.seed},
                       {"sweep", stp::sweep_to_json(rows)}};
    stp::write_json(dir / "report.json", doc);
    stp::write_sweep_csv(dir / "sweep.csv", rows);
    emit(summary_json, doc);
  });
}

namespace {

stp_status bench_impl(const std::vector<std::size_t>& m, const std::vector<std::size_t>& lengths,
                      const std::vector<std::size_t>& widths, std::size_t repeats,
                      std::uint64_t seed, const char* out_dir, char** summary_json) {
  return guarded([&] {
    need(out_dir, "out_dir");
    const std::filesystem::path dir(out_dir);
    const auto rows = stp::run_scaling_bench(m, lengths, widths, repeats, seed);
    nlohmann::json doc{{"seed", seed}, {"repeats", repeats}, {"bench", stp::bench_to_json(rows)}};
    stp::write_json(dir / "report.json", doc);
    stp::write_bench_csv(dir / "bench.csv", rows);
    emit(summary_json, doc);
  });
}

}  // namespace

stp_status stp_run_bench(const stp_config* config, const char* out_dir, char** summary_json) {
  if (!config) {
    g_last_error = "config is null";
    return STP_ERR_INVALID_ARGUMENT;
  }
  const auto& b = config->config.bench;
  return bench_impl(b.m, b.lengths, b.widths, b.repeats, config->config.experiment.seed,
                    out_dir, summary_json);
}

stp_status stp_run_bench_grid(const size_t* m, size_t m_count, const size_t* lengths,
                              size_t length_count, const size_t* widths, size_t width_count,
                              size_t repeats, uint64_t seed, const char* out_dir,
                              char** summary_json) {
  if (!m || !lengths || !widths) {
    g_last_error = "bench grids must not be null";
    return STP_ERR_INVALID_ARGUMENT;
  }
  return bench_impl({m, m + m_count}, {lengths, lengths + length_count},
                    {widths, widths + width_count}, repeats, seed, out_dir, summary_json);
}

}  // extern "C"
