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

#include "config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "error.hpp"

namespace stp {
namespace {

nlohmann::json to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& v : *a) out.push_back(to_json(v));
    return out;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  return nullptr;
}

class Reader {
 public:
  Reader(const toml::table& root, std::string source) : root_(root), source_(std::move(source)) {}

  [[noreturn]] void bad(const std::string& key, const std::string& what) const {
    fail(ErrorCode::ConfigError, source_ + ": " + key + ": " + what);
  }

  const toml::table* table(std::string_view name) const { return root_[name].as_table(); }

  double number(const toml::table& t, const std::string& key, double fallback) const {
    const auto* n = t.get(key);
    return n ? number(*n, key) : fallback;
  }

  double number(const toml::node& n, const std::string& key) const {
    if (const auto* v = n.as_floating_point()) return v->get();
    if (const auto* v = n.as_integer()) return static_cast<double>(v->get());
    if (const auto* v = n.as_string()) {
      if (v->get() == "inf") return std::numeric_limits<double>::infinity();
    }
    bad(key, "expected a number");
  }

  std::size_t count(const toml::table& t, const std::string& key, std::size_t fallback) const {
    const auto* n = t.get(key);
    if (!n) return fallback;
    const auto* v = n->as_integer();
    if (!v || v->get() < 0) bad(key, "expected a non-negative integer");
    return static_cast<std::size_t>(v->get());
  }

  std::string text(const toml::table& t, const std::string& key, std::string fallback) const {
    const auto* n = t.get(key);
    if (!n) return fallback;
    const auto* v = n->as_string();
    if (!v) bad(key, "expected a string");
    return v->get();
  }

  // Accepts a scalar or an array of numbers ("inf" allowed).
  std::vector<double> numbers(const toml::table& t, const std::string& key,
                              std::vector<double> fallback) const {
    const auto* n = t.get(key);
    if (!n) return fallback;
    if (const auto* a = n->as_array()) {
      std::vector<double> out;
      for (const auto& v : *a) out.push_back(number(v, key));
      if (out.empty()) bad(key, "must not be empty");
      return out;
    }
    return {number(t, key, 0.0)};
  }

  std::vector<std::size_t> counts(const toml::table& t, const std::string& key,
                                  std::vector<std::size_t> fallback) const {
    const auto* n = t.get(key);
    if (!n) return fallback;
    const auto* a = n->as_array();
    if (!a) return {count(t, key, 0)};
    std::vector<std::size_t> out;
    for (const auto& v : *a) {
      const auto* i = v.as_integer();
      if (!i || i->get() < 0) bad(key, "expected non-negative integers");
      out.push_back(static_cast<std::size_t>(i->get()));
    }
    if (out.empty()) bad(key, "must not be empty");
    return out;
  }

 private:
  const toml::table& root_;
  std::string source_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir,
                              const std::string& source_name) {
  toml::table root;
  try {
    root = toml::parse(text, source_name);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source_name << ":" << e.source().begin.line << ": " << e.description();
    fail(ErrorCode::ConfigError, msg.str());
  }
  const Reader r(root, source_name);
  ExperimentConfig cfg;
  const toml::table empty;

  const auto& grid = r.table("grid") ? *r.table("grid") : empty;
  cfg.grid.rows = r.count(grid, "rows", cfg.grid.rows);
  cfg.grid.cols = r.count(grid, "cols", cfg.grid.cols);
  cfg.grid.cell_size_m = r.number(grid, "cell_size_m", cfg.grid.cell_size_m);
  cfg.grid.origin_lat = r.number(grid, "origin_lat", cfg.grid.origin_lat);
  cfg.grid.origin_lon = r.number(grid, "origin_lon", cfg.grid.origin_lon);
  if (cfg.grid.rows == 0 || cfg.grid.cols == 0) r.bad("grid", "rows and cols must be >= 1");
  if (!(cfg.grid.cell_size_m > 0.0)) r.bad("grid.cell_size_m", "must be positive");
  const std::size_t m = cfg.grid.rows * cfg.grid.cols;

  const auto& model = r.table("model") ? *r.table("model") : empty;
  const std::string source = r.text(model, "source", "synth");
  if (source == "synth") {
    cfg.model.source = ModelSource::Synth;
  } else if (source == "train") {
    cfg.model.source = ModelSource::Train;
  } else if (source == "file") {
    cfg.model.source = ModelSource::File;
  } else {
    r.bad("model.source", "expected synth, train or file");
  }
  cfg.model.sigma = r.number(model, "sigma", cfg.model.sigma);
  cfg.model.smoothing = r.number(model, "smoothing", cfg.model.smoothing);
  cfg.model.resample_seconds = r.number(model, "resample_seconds", cfg.model.resample_seconds);
  cfg.model.trajectories = resolve(base_dir, r.text(model, "trajectories", ""));
  cfg.model.path = resolve(base_dir, r.text(model, "path", ""));
  if (!(cfg.model.sigma > 0.0)) r.bad("model.sigma", "must be positive");
  if (cfg.model.smoothing < 0.0) r.bad("model.smoothing", "must be >= 0");
  if (cfg.model.source == ModelSource::Train && cfg.model.trajectories.empty()) {
    r.bad("model.trajectories", "required when source = \"train\"");
  }
  if (cfg.model.source == ModelSource::File && cfg.model.path.empty()) {
    r.bad("model.path", "required when source = \"file\"");
  }

  try {
    if (const auto* arr = root["events"].as_array()) {
      cfg.events = events_from_json(to_json(*arr), m);
    } else if (const auto* file = root["events_file"].as_string()) {
      const auto path = resolve(base_dir, file->get());
      std::ifstream in(path);
      if (!in) r.bad("events_file", "cannot open " + path.string());
      cfg.events = events_from_json(nlohmann::json::parse(in), m);
    }
  } catch (const nlohmann::json::exception& e) {
    r.bad("events", e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    r.bad("events", e.what());
  }

  const auto& mech = r.table("mechanism") ? *r.table("mechanism") : empty;
  try {
    cfg.mechanism.kind = mechanism_from_string(r.text(mech, "kind", "plm"));
  } catch (const Error& e) {
    r.bad("mechanism.kind", e.what());
  }
  cfg.mechanism.alpha = r.numbers(mech, "alpha", cfg.mechanism.alpha);
  cfg.mechanism.delta = r.numbers(mech, "delta", cfg.mechanism.delta);
  cfg.mechanism.subsamples = r.count(mech, "subsamples", cfg.mechanism.subsamples);
  cfg.mechanism.decay = r.number(mech, "decay", cfg.mechanism.decay);
  cfg.mechanism.max_halvings = r.count(mech, "max_halvings", cfg.mechanism.max_halvings);
  for (double a : cfg.mechanism.alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) r.bad("mechanism.alpha", "values must be positive");
  }
  for (double d : cfg.mechanism.delta) {
    if (!(d >= 0.0 && d < 1.0)) r.bad("mechanism.delta", "values must lie in [0, 1)");
  }
  if (cfg.mechanism.subsamples == 0) r.bad("mechanism.subsamples", "must be >= 1");
  if (!(cfg.mechanism.decay > 0.0 && cfg.mechanism.decay < 1.0)) {
    r.bad("mechanism.decay", "must lie in (0, 1)");
  }

  const auto& priv = r.table("privacy") ? *r.table("privacy") : empty;
  cfg.privacy.epsilon = r.numbers(priv, "epsilon", cfg.privacy.epsilon);
  cfg.privacy.check_budget_ms = r.number(priv, "check_budget_ms", cfg.privacy.check_budget_ms);
  const std::string feasible = r.text(priv, "feasible", "simplex");
  if (feasible == "simplex") {
    cfg.privacy.feasible = FeasibleSet::Simplex;
  } else if (feasible == "box") {
    cfg.privacy.feasible = FeasibleSet::Box;
  } else {
    r.bad("privacy.feasible", "expected simplex or box");
  }
  for (double e : cfg.privacy.epsilon) {
    if (!(e > 0.0)) r.bad("privacy.epsilon", "values must be positive");
  }
  if (!(cfg.privacy.check_budget_ms > 0.0)) r.bad("privacy.check_budget_ms", "must be positive");

  const auto& exp = r.table("experiment") ? *r.table("experiment") : empty;
  cfg.experiment.repetitions = r.count(exp, "repetitions", cfg.experiment.repetitions);
  cfg.experiment.horizon = r.count(exp, "horizon", cfg.experiment.horizon);
  cfg.experiment.seed = r.count(exp, "seed", cfg.experiment.seed);
  cfg.experiment.threads = r.count(exp, "threads", cfg.experiment.threads);
  cfg.experiment.thresholds_ms = r.numbers(exp, "thresholds_ms", {});
  if (cfg.experiment.repetitions == 0) r.bad("experiment.repetitions", "must be >= 1");
  if (cfg.experiment.horizon == 0) r.bad("experiment.horizon", "must be >= 1");
  for (double t : cfg.experiment.thresholds_ms) {
    if (!(t > 0.0)) r.bad("experiment.thresholds_ms", "values must be positive");
  }
  for (const auto& e : cfg.events) {
    if (e.end() > cfg.experiment.horizon) r.bad("events", "event window ends after the horizon");
  }

  const auto& bench = r.table("bench") ? *r.table("bench") : empty;
  cfg.bench.m = r.counts(bench, "m", cfg.bench.m);
  cfg.bench.lengths = r.counts(bench, "lengths", cfg.bench.lengths);
  cfg.bench.widths = r.counts(bench, "widths", cfg.bench.widths);
  cfg.bench.repeats = r.count(bench, "repeats", cfg.bench.repeats);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::ConfigError, "cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path(), path.string());
}

SessionConfig session_config(const ExperimentConfig& config, double epsilon, double alpha,
                             double delta) {
  SessionConfig s;
  s.epsilon = epsilon;
  s.mechanism = config.mechanism.kind;
  s.initial_alpha = alpha;
  s.decay = config.mechanism.decay;
  s.delta = delta;
  s.subsamples = config.mechanism.subsamples;
  s.check_budget_ms = config.privacy.check_budget_ms;
  s.max_halvings = config.mechanism.max_halvings;
  s.feasible = config.privacy.feasible;
  s.horizon = config.experiment.horizon;
  s.seed = config.experiment.seed;
  return s;
}

}  // namespace stp
