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
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "config.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "ingest.hpp"

using namespace stp;

namespace {

const char* kSmallConfig = R"(
[grid]
rows = 4
cols = 4
cell_size_m = 1000

[model]
source = "synth"
sigma = 1.0

[[events]]
kind = "presence"
cells = [[0, 1, 4]]
start = 3
end = 5

[mechanism]
kind = "plm"
alpha = [0.5]

[privacy]
epsilon = [50.0]

[experiment]
repetitions = 2
horizon = 8
seed = 11
threads = 1
thresholds_ms = [10, "inf"]
)";

std::string read(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ErrorCode code_of(const std::string& text) {
  try {
    parse_config(text, ".");
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("config unexpectedly accepted");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kSmallConfig, ".");
  CHECK(cfg.grid.rows == 4);
  CHECK(cfg.events.size() == 1);
  CHECK(cfg.events[0].end() == 5);
  CHECK(cfg.privacy.epsilon == std::vector<double>{50.0});
  CHECK(cfg.experiment.thresholds_ms.size() == 2);
  CHECK(std::isinf(cfg.experiment.thresholds_ms[1]));
  const auto s = session_config(cfg, 50.0, 0.5, 0.05);
  CHECK(s.horizon == 8);
  CHECK(s.initial_alpha == 0.5);
}

TEST_CASE("config errors") {
  CHECK(code_of("[grid\nrows = 3") == ErrorCode::ConfigError);
  CHECK(code_of("[grid]\nrows = -3\n[[events]]\nkind='presence'\ncells=[[0]]\nstart=1\nend=1") ==
        ErrorCode::ConfigError);
  CHECK(code_of(std::string(kSmallConfig) + "\n[bench]\nrepeats = \"many\"\n") == ErrorCode::ConfigError);
  std::string bad_eps = kSmallConfig;
  bad_eps.replace(bad_eps.find("[50.0]"), 6, "[0.0]");
  CHECK(code_of(bad_eps) == ErrorCode::ConfigError);
}

TEST_CASE("ingest lat/lon rows") {
  const GridMap map(3, 3, 1000.0, {40.0, 116.0});
  const auto c0 = map.cell_center(CellIndex{0});
  const auto c4 = map.cell_center(CellIndex{4});
  std::ostringstream csv;
  csv.precision(12);
  csv << "t,lat,lon\n0," << c0.lat_deg << ',' << c0.lon_deg << "\n1," << c4.lat_deg << ','
      << c4.lon_deg << "\n2," << c4.lat_deg << ',' << c4.lon_deg << "\n";
  std::istringstream in(csv.str());
  const auto r = parse_trajectories(in, map, 0.0);
  REQUIRE(r.trajectories.size() == 1);
  CHECK(r.trajectories[0].size() == 3);
  CHECK(r.trajectories[0].cells[1].value == 4);
  CHECK(r.dropped_rows == 0);

  std::istringstream with_outlier(csv.str() + "3,10.0,10.0\n");
  const auto r2 = parse_trajectories(with_outlier, map, 0.0);
  CHECK(r2.trajectories[0].size() == 3);
  CHECK(r2.dropped_rows == 1);
}

TEST_CASE("ingest resamples and splits on blank lines") {
  const GridMap map(2, 2, 1000.0);
  std::ostringstream csv;
  csv << "t,cell\n";
  for (int t = 0; t <= 180; ++t) csv << t << ',' << (t / 60) % 4 << '\n';
  csv << "\n0,3\n1,2\n";
  std::istringstream in(csv.str());
  const auto r = parse_trajectories(in, map, 60.0);
  REQUIRE(r.trajectories.size() == 2);
  REQUIRE(r.trajectories[0].size() == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(r.trajectories[0].cells[k].value == k);
}

TEST_CASE("ingest errors") {
  const GridMap map(2, 2, 1000.0);
  auto code = [&](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_trajectories(in, map, 0.0, "x.csv");
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::InvalidArgument;
  };
  CHECK(code("time,where\n1,2\n") == ErrorCode::ParseError);
  CHECK(code("t,cell\n0,abc\n") == ErrorCode::ParseError);
  CHECK(code("t,cell\n5,0\n3,1\n") == ErrorCode::ParseError);
  CHECK(code("t,cell\n0,9\n1,8\n") == ErrorCode::EmptyAfterFilter);
  CHECK_THROWS_AS(ingest_trajectories("/nonexistent/file.csv", map), Error);
}

TEST_CASE("experiment with a huge epsilon keeps the initial budget") {
  const auto cfg = parse_config(kSmallConfig, ".");
  const auto report = run_experiment(cfg);
  REQUIRE(report.points.size() == 1);
  const auto& p = report.points[0];
  CHECK(p.runs.size() == 2);
  for (double a : p.alpha_mean) CHECK(a == doctest::Approx(0.5));
  CHECK(p.conservative_releases == 0);
}

TEST_CASE("experiment results do not depend on the thread count") {
  auto cfg = parse_config(kSmallConfig, ".");
  cfg.privacy.epsilon = {0.3};
  cfg.experiment.repetitions = 4;
  cfg.experiment.threads = 1;
  const auto one = run_experiment(cfg);
  cfg.experiment.threads = 3;
  const auto three = run_experiment(cfg);
  CHECK(one.points[0].mean_alpha == three.points[0].mean_alpha);
  CHECK(one.points[0].alpha_mean == three.points[0].alpha_mean);
}

TEST_CASE("threshold sweep without a cap has no time-outs") {
  auto cfg = parse_config(kSmallConfig, ".");
  cfg.privacy.epsilon = {0.3};
  const auto rows = run_threshold_sweep(cfg, {10.0, std::numeric_limits<double>::infinity()});
  REQUIRE(rows.size() == 2);
  CHECK(rows[1].timed_out_verdicts == 0);
}

TEST_CASE("scaling bench rows") {
  const auto rows = run_scaling_bench({3}, {2, 3}, {1, 5}, 2, 1);
  CHECK(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.width == 1);
    CHECK(r.naive_ns.has_value());
    CHECK(r.fast_ns > 0.0);
  }
}

TEST_CASE("report files") {
  const auto dir = std::filesystem::temp_directory_path() / "stp_harness_test";
  std::filesystem::create_directories(dir);
  const auto cfg = parse_config(kSmallConfig, ".");
  const auto report = run_experiment(cfg);
  write_per_timestamp_csv(dir / "per_timestamp.csv", report);
  write_per_run_csv(dir / "per_run.csv", report);
  write_json(dir / "report.json", report_to_json(report));
  CHECK(read(dir / "per_timestamp.csv").rfind("epsilon,alpha0,delta,t,alpha_mean,alpha_std,dist_mean_km\n", 0) == 0);
  CHECK(read(dir / "per_run.csv").find("mean_alpha") != std::string::npos);
  const auto doc = nlohmann::json::parse(read(dir / "report.json"));
  CHECK(doc["points"].size() == 1);

  std::vector<ReleaseRecord> recs(1);
  recs[0].t = 1;
  write_records_csv(dir / "records.csv", recs);
  CHECK(read(dir / "records.csv").rfind("t,true_cell,obs_cell,alpha,halvings,dist_km\n", 0) == 0);
  std::filesystem::remove_all(dir);
}
