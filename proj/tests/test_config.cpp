// Copyright 2026 plateloop authors.
//
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

#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "plateloop/runner.hpp"

using namespace plateloop::runner;

namespace {

/// Runs fn, requires a ConfigError, and requires its message to name the
/// offending key (or phrase).
template <typename Fn>
void expect_config_error(Fn fn, const std::string& needle) {
  try {
    fn();
    FAIL_CHECK("expected ConfigError mentioning '" << needle << "'");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK_MESSAGE(msg.find(needle) != std::string::npos,
                  "message '" << msg << "' does not mention '" << needle
                              << "'");
  }
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("the default configuration is valid and has the documented shape") {
  const ScenarioConfig cfg = default_config();
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.scenario_id == "default");
  CHECK(cfg.duration_s == 6000.0);
  CHECK(cfg.runs == 4);
  CHECK(cfg.period_s == 100.0);
  CHECK(cfg.sensor_rate_hz == 100.0);
  CHECK(cfg.plant_dt_s == 0.001);
  CHECK(cfg.topology.h1.delay_s == 0.010);
  CHECK(cfg.topology.h1.jitter_s == 0.001);
  CHECK(cfg.topology.h1.loss == 0.01);
  CHECK(cfg.topology.h1.bandwidth_bps == 1e7);
  CHECK(cfg.rto_s == 0.050);
  CHECK(cfg.x_outer.kp < 0.0);  // position loop inverts the coupling sign
  CHECK(cfg.x_inner.kp > 0.0);
  CHECK(cfg.amplitude_x_m == 0.1);
  CHECK(cfg.amplitude_y_m == 0.1);
  CHECK(cfg.contiguous_runs);
}

TEST_CASE("config serialization round trips exactly") {
  ScenarioConfig cfg = default_config();
  cfg.scenario_id = "round-trip";
  cfg.master_seed = 123456789ULL;
  cfg.topology.sta2.delay_s = 0.030;
  cfg.topology.sta2.jitter_s = 0.003;
  cfg.x_outer.kd = -0.125;

  const std::string text = config_to_json_text(cfg);
  const ScenarioConfig back = config_from_json_text(text);
  CHECK(config_to_json_text(back) == text);
  CHECK(back.scenario_id == "round-trip");
  CHECK(back.master_seed == 123456789ULL);
  CHECK(back.topology.sta2.delay_s == 0.030);
  CHECK(back.x_outer.kd == -0.125);
}

TEST_CASE("a minimal config inherits every default") {
  const ScenarioConfig cfg = config_from_json_text("{\"schema_version\": 1}");
  CHECK(config_to_json_text(cfg) == config_to_json_text(default_config()));
}

TEST_CASE("partial nested objects override only their own keys") {
  const ScenarioConfig cfg = config_from_json_text(R"({
    "schema_version": 1,
    "links": {"sta1": {"delay_s": 0.03}},
    "gains": {"x_inner": {"kd": 2.5}}
  })");
  CHECK(cfg.topology.sta1.delay_s == 0.03);
  CHECK(cfg.topology.sta1.jitter_s == 0.001);  // untouched default
  CHECK(cfg.topology.h1.delay_s == 0.010);
  CHECK(cfg.x_inner.kd == 2.5);
  CHECK(cfg.x_inner.kp == default_config().x_inner.kp);
}

TEST_CASE("unknown keys are rejected with their full path") {
  expect_config_error(
      [] {
        config_from_json_text(R"({
          "schema_version": 1,
          "links": {"h1": {"delya_s": 0.02}}
        })");
      },
      "links.h1.delya_s");
  expect_config_error(
      [] { config_from_json_text(R"({"schema_version": 1, "speed": 3})"); },
      "speed");
  expect_config_error(
      [] {
        config_from_json_text(
            R"({"schema_version": 1, "gains": {"z_outer": {}}})");
      },
      "gains.z_outer");
}

TEST_CASE("schema version is mandatory and checked") {
  expect_config_error([] { config_from_json_text("{}"); }, "schema_version");
  expect_config_error(
      [] { config_from_json_text(R"({"schema_version": 2})"); },
      "unsupported version 2");
  expect_config_error(
      [] { config_from_json_text(R"({"schema_version": "one"})"); },
      "schema_version");
}

TEST_CASE("type errors name the offending key") {
  expect_config_error(
      [] {
        config_from_json_text(
            R"({"schema_version": 1, "duration_s": "long"})");
      },
      "duration_s");
  expect_config_error(
      [] {
        config_from_json_text(
            R"({"schema_version": 1, "links": {"h1": {"loss": "none"}}})");
      },
      "links.h1.loss");
}

TEST_CASE("semantic validation names the offending key") {
  auto with = [](const char* body) {
    return std::string(R"({"schema_version": 1, )") + body + "}";
  };
  expect_config_error(
      [&] { config_from_json_text(with(R"("runs": 0)")); }, "runs");
  expect_config_error(
      [&] { config_from_json_text(with(R"("duration_s": 150, "period_s": 100)")); },
      "duration_s");
  expect_config_error(
      [&] { config_from_json_text(with(R"("period_s": -1)")); }, "period_s");
  expect_config_error(
      [&] {
        config_from_json_text(
            with(R"("links": {"sta1": {"loss": 1.0}})"));
      },
      "links.sta1.loss");
  expect_config_error(
      [&] {
        config_from_json_text(
            with(R"("links": {"sta2": {"jitter_s": 0.02}})"));
      },
      "links.sta2.delay_s");
  expect_config_error(
      [&] { config_from_json_text(with(R"("rto_s": 0.019)")); }, "rto_s");
  expect_config_error(
      [&] { config_from_json_text(with(R"("scenario_id": "a/b")")); },
      "scenario_id");
  expect_config_error(
      [&] { config_from_json_text(with(R"("plant_dt_s": 0.5)")); },
      "plant_dt_s");
  expect_config_error(
      [&] { config_from_json_text(with(R"("sensor_msg_bytes": 0)")); },
      "sensor_msg_bytes");
  expect_config_error(
      [&] { config_from_json_text(with(R"("angle_limit_rad": 0)")); },
      "angle_limit_rad");
  expect_config_error(
      [&] { config_from_json_text(with(R"("blowup_bound": 0)")); },
      "blowup_bound");
}

TEST_CASE("malformed JSON is reported as such") {
  expect_config_error([] { config_from_json_text("{not json"); },
                      "not valid JSON");
}

TEST_CASE("config files load, and missing files fail cleanly") {
  const auto path = temp_file("plateloop_test_config.json");
  {
    std::ofstream os(path);
    os << R"({"schema_version": 1, "scenario_id": "from-file"})";
  }
  const ScenarioConfig cfg = config_from_json_file(path);
  CHECK(cfg.scenario_id == "from-file");
  std::filesystem::remove(path);

  expect_config_error(
      [&] { config_from_json_file(temp_file("plateloop_missing.json")); },
      "cannot open");
}

TEST_CASE("config snapshots are loadable files") {
  const auto path = temp_file("plateloop_test_snapshot.json");
  ScenarioConfig cfg = default_config();
  cfg.scenario_id = "snap";
  write_config_snapshot(path, cfg);
  const ScenarioConfig back = config_from_json_file(path);
  CHECK(config_to_json_text(back) == config_to_json_text(cfg));
  std::filesystem::remove(path);
}
