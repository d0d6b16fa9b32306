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

// Command-line front end. Talks to the library only through the C API.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stprivacy/stprivacy.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(stp_status s) {
  switch (s) {
    case STP_OK:
      return kExitOk;
    case STP_ERR_CONFIG:
    case STP_ERR_INVALID_ARGUMENT:
      return kExitConfig;
    case STP_ERR_INTERNAL:
      return kExitInternal;
    default:
      return kExitData;
  }
}

void check(stp_status s) {
  if (s != STP_OK) {
    throw Failure{exit_code_for(s), std::string(stp_status_name(s)) + ": " + stp_last_error()};
  }
}

[[noreturn]] void config_error(const std::string& msg) { throw Failure{kExitConfig, msg}; }
[[noreturn]] void data_error(const std::string& msg) { throw Failure{kExitData, msg}; }

// RAII holders for C handles.
template <typename T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Free(p);
  }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Grid = Handle<stp_grid, stp_grid_free>;
using Model = Handle<stp_model, stp_model_free>;
using Events = Handle<stp_events, stp_events_free>;
using Trajs = Handle<stp_trajectories, stp_trajectories_free>;
using Session = Handle<stp_session, stp_session_free>;
using Config = Handle<stp_config, stp_config_free>;

struct CString {
  char* p = nullptr;
  ~CString() { stp_string_free(p); }
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
};

struct GridFlags {
  std::size_t rows = 20;
  std::size_t cols = 20;
  double cell_size_m = 1000.0;
  double origin_lat = 0.0;
  double origin_lon = 0.0;

  void add(CLI::App* app) {
    app->add_option("--rows", rows, "Grid rows")->capture_default_str();
    app->add_option("--cols", cols, "Grid columns")->capture_default_str();
    app->add_option("--cell-size", cell_size_m, "Cell edge in meters")->capture_default_str();
    app->add_option("--origin-lat", origin_lat, "Latitude of the south-west corner");
    app->add_option("--origin-lon", origin_lon, "Longitude of the south-west corner");
  }
};

std::filesystem::path out_dir(const Globals& g) {
  std::filesystem::path dir(g.out);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) data_error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void load_config(const Globals& g, Config& cfg) {
  if (g.config.empty()) return;
  check(stp_config_load(g.config.c_str(), cfg.out()));
  if (g.seed) stp_config_set_seed(cfg.get(), *g.seed);
}

void make_grid(const Config& cfg, const GridFlags& flags, Grid& grid) {
  if (cfg.get()) {
    check(stp_config_grid(cfg.get(), grid.out()));
  } else {
    check(stp_grid_create(flags.rows, flags.cols, flags.cell_size_m, flags.origin_lat,
                          flags.origin_lon, grid.out()));
  }
}

void make_model(const Config& cfg, const std::string& path, Model& model) {
  if (!path.empty()) {
    check(stp_model_load(path.c_str(), model.out()));
  } else if (cfg.get()) {
    check(stp_config_model(cfg.get(), model.out()));
  } else {
    config_error("a model is required: pass --model or --config");
  }
}

void make_events(const Config& cfg, const std::string& path, std::size_t m, Events& events) {
  if (!path.empty()) {
    check(stp_events_load(path.c_str(), m, events.out()));
  } else if (cfg.get()) {
    check(stp_config_events(cfg.get(), events.out()));
  } else {
    config_error("events are required: pass --events or --config");
  }
  if (stp_events_count(events.get()) == 0) config_error("no events defined");
}

double parse_double(const std::string& s, const std::string& what) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    data_error(what + ": cannot parse '" + s + "'");
  }
}

std::vector<double> split_numbers(const std::string& line, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    if (b == std::string::npos) continue;
    out.push_back(parse_double(field.substr(b, e - b + 1), what));
  }
  return out;
}

// One emission column per non-empty line, m comma-separated values.
std::vector<double> read_emissions(const std::string& path, std::size_t m, std::size_t& t) {
  std::ifstream in(path);
  if (!in) data_error("cannot open " + path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  t = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto values = split_numbers(line, path + ":" + std::to_string(lineno));
    if (values.size() != m) {
      data_error(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(m) +
                 " values, got " + std::to_string(values.size()));
    }
    out.insert(out.end(), values.begin(), values.end());
    ++t;
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) data_error("cannot write " + path.string());
  out << text << '\n';
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(12);
  out << v;
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatiotemporal event privacy for location release"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  app.add_option("--config", g.config, "TOML experiment config");
  auto* seed_opt = app.add_option("--seed", seed_value, "Master seed");
  app.add_option("--out", g.out, "Output directory")->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Fit a transition matrix from trajectories");
  std::string train_csv;
  double smoothing = 0.01, resample = 0.0;
  GridFlags train_grid;
  train->add_option("--trajectories", train_csv, "Trajectory CSV")->required();
  train->add_option("--smoothing", smoothing, "Additive pseudo-count")->capture_default_str();
  train->add_option("--resample-seconds", resample, "Step length in seconds (0: keep rows)");
  train_grid.add(train);

  // synth
  auto* synth = app.add_subcommand("synth", "Gaussian-kernel synthetic transition matrix");
  GridFlags synth_grid;
  double sigma = 1.0;
  synth_grid.add(synth);
  synth->add_option("--sigma", sigma, "Kernel scale in cell units")->capture_default_str();

  // quantify
  auto* quantify = app.add_subcommand("quantify", "Check observations against events");
  std::string q_model, q_events, q_emissions, q_observations, q_pi;
  double q_eps = 1.0, q_alpha = 0.2, q_budget = 0.0;
  std::size_t q_subsamples = 3;
  bool q_box = false;
  GridFlags q_grid;
  quantify->add_option("--model", q_model, "Model JSON");
  quantify->add_option("--events", q_events, "Events JSON");
  auto* em_opt = quantify->add_option("--emissions", q_emissions,
                                      "CSV: one likelihood column per line");
  quantify->add_option("--observations", q_observations,
                       "Observed cells (t,cell CSV), turned into columns with --alpha")
      ->excludes(em_opt);
  quantify->add_option("--alpha", q_alpha, "Planar Laplace budget per km")->capture_default_str();
  quantify->add_option("--subsamples", q_subsamples, "Integration subsamples per axis");
  quantify->add_option("--epsilon", q_eps, "Event privacy level")->capture_default_str();
  quantify->add_option("--pi", q_pi, "Initial distribution, comma separated");
  quantify->add_option("--budget-ms", q_budget, "Per-check time cap (0: none)");
  quantify->add_flag("--box", q_box, "Check over the unit box instead of the simplex");
  q_grid.add(quantify);

  // enforce
  auto* enforce = app.add_subcommand("enforce", "Release a trajectory under the privacy check");
  std::string e_model, e_events, e_traj, e_mech = "plm";
  std::size_t e_index = 0;
  stp_session_params params;
  stp_session_params_default(&params);
  GridFlags e_grid;
  enforce->add_option("--model", e_model, "Model JSON");
  enforce->add_option("--events", e_events, "Events JSON");
  enforce->add_option("--trajectory", e_traj, "Trajectory CSV")->required();
  enforce->add_option("--index", e_index, "Trajectory to use from the file");
  enforce->add_option("--mechanism", e_mech, "plm | plm_deltaset | uniform")->capture_default_str();
  enforce->add_option("--epsilon", params.epsilon, "Event privacy level")->capture_default_str();
  enforce->add_option("--alpha", params.initial_alpha, "Initial budget per km")->capture_default_str();
  enforce->add_option("--delta", params.delta, "Location-set slack")->capture_default_str();
  enforce->add_option("--decay", params.decay, "Budget multiplier on rejection")->capture_default_str();
  enforce->add_option("--subsamples", params.subsamples, "Integration subsamples per axis");
  enforce->add_option("--check-budget-ms", params.check_budget_ms, "Per-check cap (0: none)");
  enforce->add_option("--max-halvings", params.max_halvings, "Rejections before uniform release");
  e_grid.add(enforce);

  auto* simulate = app.add_subcommand("simulate", "Run the experiment grid from --config");

  auto* bench = app.add_subcommand("bench", "Fast path vs enumeration timings");
  std::vector<std::size_t> b_m{9}, b_len{5, 10, 15}, b_width{5};
  std::size_t b_repeats = 5;
  bench->add_option("--m", b_m, "State counts");
  bench->add_option("--lengths", b_len, "Event lengths");
  bench->add_option("--widths", b_width, "Cells per region");
  bench->add_option("--repeats", b_repeats, "Timing repeats");

  auto* sweep = app.add_subcommand("sweep-threshold", "Vary the per-check time cap");
  std::vector<std::string> thresholds;
  sweep->add_option("--thresholds", thresholds, "Caps in ms ('inf' for none)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    Config cfg;
    load_config(g, cfg);

    if (*train) {
      Grid grid;
      make_grid(cfg, train_grid, grid);
      Trajs trajs;
      std::size_t dropped = 0;
      check(stp_trajectories_load(train_csv.c_str(), grid.get(), resample, trajs.out(), &dropped));
      Model model;
      check(stp_model_train(trajs.get(), stp_grid_cells(grid.get()), smoothing, model.out()));
      const auto path = out_dir(g) / "model.json";
      check(stp_model_save(model.get(), path.string().c_str()));
      if (dropped) std::cerr << "warning: dropped " << dropped << " rows outside the grid\n";
      std::cout << "trained on " << stp_trajectories_count(trajs.get()) << " trajectories -> "
                << path.string() << "\n";
    } else if (*synth) {
      Model model;
      check(stp_model_synth(synth_grid.rows, synth_grid.cols, sigma, model.out()));
      const auto path = out_dir(g) / "model.json";
      check(stp_model_save(model.get(), path.string().c_str()));
      std::cout << "wrote " << path.string() << "\n";
    } else if (*quantify) {
      Model model;
      make_model(cfg, q_model, model);
      const std::size_t m = stp_model_states(model.get());
      Events events;
      make_events(cfg, q_events, m, events);
      std::vector<double> columns;
      std::size_t t = 0;
      if (!q_emissions.empty()) {
        columns = read_emissions(q_emissions, m, t);
      } else if (!q_observations.empty()) {
        Grid grid;
        make_grid(cfg, q_grid, grid);
        if (stp_grid_cells(grid.get()) != m) config_error("grid size does not match the model");
        std::vector<double> plm(m * m);
        check(stp_plm_matrix(grid.get(), q_alpha, q_subsamples, plm.data()));
        Trajs obs;
        check(stp_trajectories_load(q_observations.c_str(), grid.get(), 0.0, obs.out(), nullptr));
        std::vector<std::size_t> cells(stp_trajectory_length(obs.get(), 0));
        check(stp_trajectory_cells(obs.get(), 0, cells.data(), cells.size()));
        for (std::size_t o : cells) {
          for (std::size_t i = 0; i < m; ++i) columns.push_back(plm[i * m + o]);
        }
        t = cells.size();
      } else {
        config_error("quantify needs --emissions or --observations");
      }
      std::vector<double> pi;
      if (!q_pi.empty()) {
        pi = split_numbers(q_pi, "--pi");
        if (pi.size() != m) config_error("--pi needs " + std::to_string(m) + " values");
      }
      CString json;
      check(stp_quantify(model.get(), events.get(), columns.data(), t,
                         pi.empty() ? nullptr : pi.data(), q_eps, q_budget, q_box ? 1 : 0,
                         &json.p));
      write_text(out_dir(g) / "report.json", json.p);
      std::cout << json.p << "\n";
    } else if (*enforce) {
      Grid grid;
      make_grid(cfg, e_grid, grid);
      Model model;
      make_model(cfg, e_model, model);
      const std::size_t m = stp_model_states(model.get());
      if (stp_grid_cells(grid.get()) != m) config_error("grid size does not match the model");
      Events events;
      make_events(cfg, e_events, m, events);
      Trajs trajs;
      std::size_t dropped = 0;
      check(stp_trajectories_load(e_traj.c_str(), grid.get(), 0.0, trajs.out(), &dropped));
      if (e_index >= stp_trajectories_count(trajs.get())) config_error("--index out of range");
      std::vector<std::size_t> cells(stp_trajectory_length(trajs.get(), e_index));
      check(stp_trajectory_cells(trajs.get(), e_index, cells.data(), cells.size()));

      if (e_mech == "plm") {
        params.mechanism = STP_MECH_PLM;
      } else if (e_mech == "plm_deltaset") {
        params.mechanism = STP_MECH_PLM_DELTASET;
      } else if (e_mech == "uniform") {
        params.mechanism = STP_MECH_UNIFORM;
      } else {
        config_error("unknown mechanism '" + e_mech + "'");
      }
      params.horizon = cells.size();
      if (g.seed) params.seed = *g.seed;
      Session session;
      check(stp_session_create(grid.get(), model.get(), events.get(), &params, session.out()));

      const auto dir = out_dir(g);
      std::ofstream csv(dir / "per_timestamp.csv");
      if (!csv) data_error("cannot write per_timestamp.csv");
      csv << "t,true_cell,obs_cell,alpha,halvings,dist_km\n";
      double alpha_sum = 0.0, dist_sum = 0.0;
      std::size_t forced = 0;
      for (std::size_t c : cells) {
        stp_release_record r;
        check(stp_session_step(session.get(), c, &r));
        csv << r.t << ',' << r.true_cell << ',' << r.obs_cell << ',' << fmt(r.alpha) << ','
            << r.halvings << ',' << fmt(r.dist_km) << '\n';
        alpha_sum += r.alpha;
        dist_sum += r.dist_km;
        forced += r.forced_uniform ? 1 : 0;
      }
      const double n = cells.empty() ? 1.0 : static_cast<double>(cells.size());
      std::ostringstream report;
      report << "{\n  \"steps\": " << cells.size() << ",\n  \"mean_alpha\": " << fmt(alpha_sum / n)
             << ",\n  \"mean_distance_km\": " << fmt(dist_sum / n)
             << ",\n  \"forced_uniform\": " << forced << ",\n  \"dropped_rows\": " << dropped
             << "\n}";
      write_text(dir / "report.json", report.str());
      std::cout << report.str() << "\n";
    } else if (*simulate) {
      if (!cfg.get()) config_error("simulate needs --config");
      CString json;
      check(stp_run_experiment(cfg.get(), out_dir(g).string().c_str(), &json.p));
      std::cout << "wrote " << (out_dir(g) / "report.json").string() << "\n";
    } else if (*bench) {
      CString json;
      if (cfg.get()) {
        check(stp_run_bench(cfg.get(), out_dir(g).string().c_str(), &json.p));
      } else {
        check(stp_run_bench_grid(b_m.data(), b_m.size(), b_len.data(), b_len.size(),
                                 b_width.data(), b_width.size(), b_repeats, g.seed.value_or(0),
                                 out_dir(g).string().c_str(), &json.p));
      }
      std::cout << json.p << "\n";
    } else if (*sweep) {
      if (!cfg.get()) config_error("sweep-threshold needs --config");
      std::vector<double> caps;
      for (const auto& s : thresholds) {
        const double v = parse_double(s, "--thresholds");
        if (!(v > 0.0)) config_error("thresholds must be positive");
        caps.push_back(v);
      }
      CString json;
      check(stp_run_threshold_sweep(cfg.get(), caps.empty() ? nullptr : caps.data(), caps.size(),
                                    out_dir(g).string().c_str(), &json.p));
      std::cout << json.p << "\n";
    }
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << "\n";
    return f.code;
  }
  return kExitOk;
}
