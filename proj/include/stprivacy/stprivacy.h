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

/* C interface to the stprivacy library. Every function returns an
 * stp_status; on failure stp_last_error() describes the problem for the
 * calling thread. Handles are opaque and released with the matching
 * *_free function. Strings returned through char** are freed with
 * stp_string_free. */

#ifndef STPRIVACY_STPRIVACY_H_
#define STPRIVACY_STPRIVACY_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define STP_API __declspec(dllexport)
#else
#define STP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stp_status {
  STP_OK = 0,
  STP_ERR_INVALID_ARGUMENT = 1,
  STP_ERR_OUT_OF_BOUNDS = 2,
  STP_ERR_EMPTY_CORPUS = 3,
  STP_ERR_TIMESTAMP_OUT_OF_RANGE = 4,
  STP_ERR_WINDOW_OUT_OF_RANGE = 5,
  STP_ERR_HORIZON_EXCEEDED = 6,
  STP_ERR_OUT_OF_ORDER = 7,
  STP_ERR_TOO_LARGE = 8,
  STP_ERR_DEGENERATE_EVENT = 9,
  STP_ERR_DEGENERATE_PRIOR = 10,
  STP_ERR_EMPTY_SET = 11,
  STP_ERR_ZERO_LIKELIHOOD = 12,
  STP_ERR_PARSE = 13,
  STP_ERR_EMPTY_AFTER_FILTER = 14,
  STP_ERR_CONFIG = 15,
  STP_ERR_IO = 16,
  STP_ERR_INTERNAL = 99
} stp_status;

typedef enum stp_mechanism {
  STP_MECH_PLM = 0,
  STP_MECH_PLM_DELTASET = 1,
  STP_MECH_UNIFORM = 2
} stp_mechanism;

typedef struct stp_grid stp_grid;
typedef struct stp_model stp_model;
typedef struct stp_events stp_events;
typedef struct stp_trajectories stp_trajectories;
typedef struct stp_session stp_session;
typedef struct stp_config stp_config;

STP_API const char* stp_version(void);
STP_API const char* stp_last_error(void);
STP_API const char* stp_status_name(stp_status status);
STP_API void stp_string_free(char* s);

/* Grid */
STP_API stp_status stp_grid_create(size_t rows, size_t cols, double cell_size_m,
                                   double origin_lat, double origin_lon, stp_grid** out);
STP_API void stp_grid_free(stp_grid* grid);
STP_API size_t stp_grid_cells(const stp_grid* grid);
STP_API stp_status stp_grid_locate(const stp_grid* grid, double lat, double lon,
                                   size_t* cell);
STP_API stp_status stp_grid_distance_km(const stp_grid* grid, size_t a, size_t b,
                                        double* km);

/* Mobility model */
STP_API stp_status stp_model_from_matrix(size_t m, const double* row_major, stp_model** out);
STP_API stp_status stp_model_synth(size_t rows, size_t cols, double sigma, stp_model** out);
STP_API stp_status stp_model_train(const stp_trajectories* trajectories, size_t m,
                                   double smoothing, stp_model** out);
STP_API stp_status stp_model_load(const char* path, stp_model** out);
STP_API stp_status stp_model_save(const stp_model* model, const char* path);
STP_API void stp_model_free(stp_model* model);
STP_API size_t stp_model_states(const stp_model* model);

/* Trajectories (CSV with header t,lat,lon or t,cell) */
STP_API stp_status stp_trajectories_load(const char* path, const stp_grid* grid,
                                         double resample_seconds, stp_trajectories** out,
                                         size_t* dropped_rows);
STP_API void stp_trajectories_free(stp_trajectories* trajectories);
STP_API size_t stp_trajectories_count(const stp_trajectories* trajectories);
STP_API size_t stp_trajectory_length(const stp_trajectories* trajectories, size_t index);
/* Copies up to cap cells of trajectory `index` into cells. */
STP_API stp_status stp_trajectory_cells(const stp_trajectories* trajectories, size_t index,
                                        size_t* cells, size_t cap);

/* Events (JSON object or array of objects) */
STP_API stp_status stp_events_parse(const char* json, size_t m, stp_events** out);
STP_API stp_status stp_events_load(const char* path, size_t m, stp_events** out);
STP_API void stp_events_free(stp_events* events);
STP_API size_t stp_events_count(const stp_events* events);

/* Prior probability of event `index` for initial distribution pi (length m). */
STP_API stp_status stp_prior(const stp_model* model, const stp_events* events, size_t index,
                             const double* pi, double* out);

/* Discretized planar Laplace emission matrix, written row-major (m * m). */
STP_API stp_status stp_plm_matrix(const stp_grid* grid, double alpha, size_t subsamples,
                                  double* out);

/* Checks every event against an observation prefix. emissions holds t
 * likelihood columns of length m back to back. Verdicts quantify over all
 * initial distributions; when pi is non-NULL the fixed-distribution ratios
 * are reported as well. Result is a JSON document in *out_json. */
STP_API stp_status stp_quantify(const stp_model* model, const stp_events* events,
                                const double* emissions, size_t t, const double* pi,
                                double epsilon, double budget_ms, int box_constraints,
                                char** out_json);

/* Enforcement session */
typedef struct stp_session_params {
  double epsilon;
  stp_mechanism mechanism;
  double initial_alpha;
  double decay;
  double delta;
  size_t subsamples;
  double check_budget_ms; /* <= 0 or infinite: no cap */
  size_t max_halvings;
  size_t horizon;
  uint64_t seed;
  int box_constraints;
} stp_session_params;

typedef struct stp_release_record {
  size_t t;
  size_t true_cell;
  size_t obs_cell;
  double alpha;
  size_t halvings;
  double dist_km;
  int forced_uniform;
  size_t unknown_verdicts;
} stp_release_record;

STP_API void stp_session_params_default(stp_session_params* params);
STP_API stp_status stp_session_create(const stp_grid* grid, const stp_model* model,
                                      const stp_events* events,
                                      const stp_session_params* params, stp_session** out);
STP_API stp_status stp_session_step(stp_session* session, size_t true_cell,
                                    stp_release_record* record);
STP_API void stp_session_free(stp_session* session);

/* Experiments driven by a TOML config */
STP_API stp_status stp_config_load(const char* path, stp_config** out);
STP_API void stp_config_free(stp_config* config);
STP_API void stp_config_set_seed(stp_config* config, uint64_t seed);
STP_API size_t stp_config_cells(const stp_config* config);
/* Grid, model (synthesized, trained or loaded as the config says) and
 * events described by the config. */
STP_API stp_status stp_config_grid(const stp_config* config, stp_grid** out);
STP_API stp_status stp_config_model(const stp_config* config, stp_model** out);
STP_API stp_status stp_config_events(const stp_config* config, stp_events** out);
/* Writes report.json, per_timestamp.csv and per_run.csv into out_dir. */
STP_API stp_status stp_run_experiment(const stp_config* config, const char* out_dir,
                                      char** summary_json);
/* thresholds may be NULL to use the config's thresholds_ms. Writes
 * report.json and sweep.csv. */
STP_API stp_status stp_run_threshold_sweep(const stp_config* config, const double* thresholds,
                                           size_t count, const char* out_dir,
                                           char** summary_json);
/* Uses the config's [bench] table. Writes bench.csv and report.json. */
STP_API stp_status stp_run_bench(const stp_config* config, const char* out_dir,
                                 char** summary_json);
/* Same, with explicit grids. */
STP_API stp_status stp_run_bench_grid(const size_t* m, size_t m_count, const size_t* lengths,
                                      size_t length_count, const size_t* widths,
                                      size_t width_count, size_t repeats, uint64_t seed,
                                      const char* out_dir, char** summary_json);

#ifdef __cplusplus
}
#endif

#endif  /* STPRIVACY_STPRIVACY_H_ */
