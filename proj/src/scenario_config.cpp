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

#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "plateloop/runner.hpp"

namespace plateloop::runner {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

[[noreturn]] void bad_key(const std::string& path, const std::string& why) {
  throw ConfigError("config key '" + path + "': " + why);
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) bad_key(path, "expected an object");
}

/// Walks an object whose allowed keys are fixed; unknown keys are errors so
/// typos cannot silently fall back to defaults.
class StrictObject {
 public:
  StrictObject(const json& j, std::string path)
      : j_(j), path_(std::move(path)) {
    require_object(j_, path_);
  }

  ~StrictObject() = default;

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& at(const char* key) { return j_.at(key); }

  template <typename T>
  void load(const char* key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      bad_key(path_ + key, "wrong type");
    }
  }

  void check_unknown() const {
    for (const auto& item : j_.items()) {
      if (seen_.count(item.key()) == 0) {
        bad_key(path_ + item.key(), "unknown key");
      }
    }
  }

  std::string child_path(const char* key) const { return path_ + key + "."; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void load_gains(StrictObject& parent, const char* key,
                control::PdGains& out) {
  if (!parent.has(key)) return;
  StrictObject o(parent.at(key), parent.child_path(key));
  o.load("kp", out.kp);
  o.load("kd", out.kd);
  o.check_unknown();
}

void load_link(StrictObject& parent, const char* key,
               netem::LinkParams& out) {
  if (!parent.has(key)) return;
  StrictObject o(parent.at(key), parent.child_path(key));
  o.load("delay_s", out.delay_s);
  o.load("jitter_s", out.jitter_s);
  o.load("loss", out.loss);
  o.load("bandwidth_bps", out.bandwidth_bps);
  o.check_unknown();
}

void check_finite(double v, const char* key) {
  if (!std::isfinite(v)) {
    throw ConfigError(std::string("config key '") + key +
                      "': must be finite");
  }
}

json gains_to_json(const control::PdGains& g) {
  return json{{"kp", g.kp}, {"kd", g.kd}};
}

json link_to_json(const netem::LinkParams& l) {
  return json{{"delay_s", l.delay_s},
              {"jitter_s", l.jitter_s},
              {"loss", l.loss},
              {"bandwidth_bps", l.bandwidth_bps}};
}

}  // namespace

ScenarioConfig default_config() {
  ScenarioConfig cfg;
  // Gains frozen from a closed-loop grid search validated with a seed
  // gauntlet: every candidate ran 6000 s on 20 master seeds plus 3x-delay
  // and 10%-loss variants, and only candidates with zero divergences were
  // ranked (by mean per-period error). The derivative terms differentiate
  // across irregular network release intervals, so large kd values amplify
  // timing noise; the inner angle loop is fastest and tolerates none, and
  // relies on the motor pole for damping instead. The outer loops are
  // negative because a positive plate angle accelerates the ball in the
  // negative direction (the -7 rad -> m/s^2 coupling), so the position
  // loop must invert the sign; the inner angle loop is direct.
  cfg.x_outer = {-1.30, -0.55};
  cfg.x_inner = {100.0, 0.0};
  cfg.y_outer = {-1.30, -0.55};
  cfg.y_inner = {100.0, 0.0};
  return cfg;
}

void ScenarioConfig::validate() const {
  if (scenario_id.empty()) {
    throw ConfigError("config key 'scenario_id': must not be empty");
  }
  for (char c : scenario_id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' ||
                    c == '.';
    if (!ok) {
      throw ConfigError(
          "config key 'scenario_id': only [A-Za-z0-9._-] allowed (used as a "
          "directory name)");
    }
  }
  if (scenario_id == "." || scenario_id == "..") {
    throw ConfigError("config key 'scenario_id': reserved name");
  }

  if (!(duration_s > 0.0)) {
    throw ConfigError("config key 'duration_s': must be positive");
  }
  if (runs < 1) {
    throw ConfigError("config key 'runs': must be >= 1");
  }
  if (!(period_s > 0.0)) {
    throw ConfigError("config key 'period_s': must be positive");
  }
  const double cycles = duration_s / period_s;
  if (std::fabs(cycles - std::round(cycles)) > 1e-9 * std::max(1.0, cycles)) {
    throw ConfigError(
        "config key 'duration_s': must be an integer multiple of period_s");
  }
  if (!(sensor_rate_hz > 0.0)) {
    throw ConfigError("config key 'sensor_rate_hz': must be positive");
  }
  if (!(plant_dt_s > 0.0)) {
    throw ConfigError("config key 'plant_dt_s': must be positive");
  }
  if (sensor_rate_hz * plant_dt_s > 1.0 + 1e-12) {
    throw ConfigError(
        "config key 'plant_dt_s': sensor_rate_hz * plant_dt_s must be <= 1 "
        "(the plant must step at least once per sensor sample)");
  }

  if (!(motor.b1 > 0.0)) {
    throw ConfigError("config key 'motor.b1': must be positive");
  }
  if (!(motor.b0 > 0.0)) {
    throw ConfigError("config key 'motor.b0': must be positive");
  }

  const struct {
    const char* name;
    const netem::LinkParams& link;
  } links[] = {{"links.h1", topology.h1},
               {"links.sta1", topology.sta1},
               {"links.sta2", topology.sta2}};
  for (const auto& [name, link] : links) {
    const std::string base = std::string("config key '") + name;
    if (!(link.jitter_s >= 0.0)) {
      throw ConfigError(base + ".jitter_s': must be >= 0");
    }
    if (!(link.delay_s >= link.jitter_s)) {
      throw ConfigError(base + ".delay_s': must be >= jitter_s");
    }
    if (!(link.loss >= 0.0 && link.loss < 1.0)) {
      throw ConfigError(base + ".loss': must be in [0, 1)");
    }
    if (!(link.bandwidth_bps > 0.0)) {
      throw ConfigError(base + ".bandwidth_bps': must be positive");
    }
  }

  check_finite(x_outer.kp, "gains.x_outer.kp");
  check_finite(x_outer.kd, "gains.x_outer.kd");
  check_finite(x_inner.kp, "gains.x_inner.kp");
  check_finite(x_inner.kd, "gains.x_inner.kd");
  check_finite(y_outer.kp, "gains.y_outer.kp");
  check_finite(y_outer.kd, "gains.y_outer.kd");
  check_finite(y_inner.kp, "gains.y_inner.kp");
  check_finite(y_inner.kd, "gains.y_inner.kd");

  if (!(angle_limit_rad > 0.0)) {
    throw ConfigError("config key 'angle_limit_rad': must be positive");
  }
  if (!(rto_s > 0.0)) {
    throw ConfigError("config key 'rto_s': must be positive");
  }
  check_finite(amplitude_x_m, "amplitude_x_m");
  check_finite(amplitude_y_m, "amplitude_y_m");
  if (sensor_msg_bytes == 0) {
    throw ConfigError("config key 'sensor_msg_bytes': must be positive");
  }
  if (control_msg_bytes == 0) {
    throw ConfigError("config key 'control_msg_bytes': must be positive");
  }
  if (!(blowup_bound > 0.0)) {
    throw ConfigError("config key 'blowup_bound': must be positive");
  }

  // The reliable layer requires headroom over the loss-free one-way latency
  // on every flow it will carry (data flows between the stations,
  // registration flows to/from h1).
  const std::size_t max_msg = std::max(
      {sensor_msg_bytes, control_msg_bytes, std::size_t{32}});
  const netem::LinkParams* all[] = {&topology.h1, &topology.sta1,
                                    &topology.sta2};
  for (const auto* src : all) {
    for (const auto* dst : all) {
      if (src == dst) continue;
      const double one_way =
          src->delay_s + dst->delay_s +
          static_cast<double>(max_msg) * 8.0 / src->bandwidth_bps +
          static_cast<double>(max_msg) * 8.0 / dst->bandwidth_bps;
      if (rto_s <= one_way) {
        throw ConfigError(
            "config key 'rto_s': must exceed the expected one-way delay (" +
            std::to_string(one_way) + " s) of every flow");
      }
    }
  }
}

namespace {

ScenarioConfig config_from_json(const json& j) {
  ScenarioConfig cfg = default_config();
  StrictObject root(j, "");

  if (!root.has("schema_version")) {
    bad_key("schema_version", "missing (expected 1)");
  }
  int version = -1;
  try {
    version = root.at("schema_version").get<int>();
  } catch (const json::exception&) {
    bad_key("schema_version", "wrong type");
  }
  if (version != kSchemaVersion) {
    bad_key("schema_version",
            "unsupported version " + std::to_string(version) + " (expected " +
                std::to_string(kSchemaVersion) + ")");
  }

  root.load("scenario_id", cfg.scenario_id);
  root.load("master_seed", cfg.master_seed);
  root.load("duration_s", cfg.duration_s);
  root.load("runs", cfg.runs);
  root.load("period_s", cfg.period_s);
  root.load("sensor_rate_hz", cfg.sensor_rate_hz);
  root.load("plant_dt_s", cfg.plant_dt_s);

  if (root.has("motor")) {
    StrictObject o(root.at("motor"), root.child_path("motor"));
    o.load("b1", cfg.motor.b1);
    o.load("b0", cfg.motor.b0);
    o.check_unknown();
  }
  if (root.has("links")) {
    StrictObject o(root.at("links"), root.child_path("links"));
    load_link(o, "h1", cfg.topology.h1);
    load_link(o, "sta1", cfg.topology.sta1);
    load_link(o, "sta2", cfg.topology.sta2);
    o.check_unknown();
  }
  if (root.has("gains")) {
    StrictObject o(root.at("gains"), root.child_path("gains"));
    load_gains(o, "x_outer", cfg.x_outer);
    load_gains(o, "x_inner", cfg.x_inner);
    load_gains(o, "y_outer", cfg.y_outer);
    load_gains(o, "y_inner", cfg.y_inner);
    o.check_unknown();
  }

  root.load("angle_limit_rad", cfg.angle_limit_rad);
  root.load("rto_s", cfg.rto_s);
  root.load("amplitude_x_m", cfg.amplitude_x_m);
  root.load("amplitude_y_m", cfg.amplitude_y_m);
  root.load("sensor_msg_bytes", cfg.sensor_msg_bytes);
  root.load("control_msg_bytes", cfg.control_msg_bytes);
  root.load("blowup_bound", cfg.blowup_bound);
  root.load("contiguous_runs", cfg.contiguous_runs);
  root.check_unknown();

  cfg.validate();
  return cfg;
}

json config_to_json(const ScenarioConfig& cfg) {
  return json{
      {"schema_version", kSchemaVersion},
      {"scenario_id", cfg.scenario_id},
      {"master_seed", cfg.master_seed},
      {"duration_s", cfg.duration_s},
      {"runs", cfg.runs},
      {"period_s", cfg.period_s},
      {"sensor_rate_hz", cfg.sensor_rate_hz},
      {"plant_dt_s", cfg.plant_dt_s},
      {"motor", json{{"b1", cfg.motor.b1}, {"b0", cfg.motor.b0}}},
      {"links", json{{"h1", link_to_json(cfg.topology.h1)},
                     {"sta1", link_to_json(cfg.topology.sta1)},
                     {"sta2", link_to_json(cfg.topology.sta2)}}},
      {"gains", json{{"x_outer", gains_to_json(cfg.x_outer)},
                     {"x_inner", gains_to_json(cfg.x_inner)},
                     {"y_outer", gains_to_json(cfg.y_outer)},
                     {"y_inner", gains_to_json(cfg.y_inner)}}},
      {"angle_limit_rad", cfg.angle_limit_rad},
      {"rto_s", cfg.rto_s},
      {"amplitude_x_m", cfg.amplitude_x_m},
      {"amplitude_y_m", cfg.amplitude_y_m},
      {"sensor_msg_bytes", cfg.sensor_msg_bytes},
      {"control_msg_bytes", cfg.control_msg_bytes},
      {"blowup_bound", cfg.blowup_bound},
      {"contiguous_runs", cfg.contiguous_runs},
  };
}

}  // namespace

ScenarioConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(j);
}

ScenarioConfig config_from_json_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() +
                      " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

std::string config_to_json_text(const ScenarioConfig& cfg) {
  return config_to_json(cfg).dump(2) + "\n";
}

void write_config_snapshot(const std::filesystem::path& path,
                           const ScenarioConfig& cfg) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) {
    throw std::runtime_error("cannot write config snapshot: " + path.string());
  }
  os << config_to_json_text(cfg);
}

}  // namespace plateloop::runner
