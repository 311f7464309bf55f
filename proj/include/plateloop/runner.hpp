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

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "plateloop/analysis.hpp"
#include "plateloop/control.hpp"
#include "plateloop/netem.hpp"
#include "plateloop/plant.hpp"
#include "plateloop/trace.hpp"

namespace plateloop::runner {

/// Invalid configuration input (bad value, unknown key, malformed file).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Expected trace files or run directories are absent or incomplete.
class MissingDataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig {
  std::string scenario_id = "default";
  std::uint64_t master_seed = 1;
  double duration_s = 6000.0;  // per run; integer multiple of period_s
  int runs = 4;
  double period_s = 100.0;       // reference trajectory period
  double sensor_rate_hz = 100.0;  // time-triggered sampling on sta2
  double plant_dt_s = 0.001;      // fixed plant integration step
  plant::MotorCoefficients motor;
  netem::Topology topology;
  control::PdGains x_outer;  // position -> desired angle (see default_config)
  control::PdGains x_inner;  // angle -> voltage
  control::PdGains y_outer;
  control::PdGains y_inner;
  double angle_limit_rad = plant::kDefaultAngleLimitRad;
  double rto_s = 0.050;  // retransmission timeout of the reliable layer
  double amplitude_x_m = 0.1;
  double amplitude_y_m = 0.1;
  std::size_t sensor_msg_bytes = 64;
  std::size_t control_msg_bytes = 32;
  double blowup_bound = plant::kDefaultBlowupBound;
  // Contiguous runs carry plant/controller state across run boundaries (run
  // k+1 starts where run k ended, on one global clock). When false, every run
  // restarts from the canonical initial state; the global clock still
  // advances so traces never overlap in time. Each run re-seeds the network
  // either way.
  bool contiguous_runs = true;

  void validate() const;  // throws ConfigError naming the offending key
};

/// Stabilizing default gains for the default plant and network. Values frozen
/// from a closed-loop grid search (see tools/tune_gains notes in README).
ScenarioConfig default_config();

/// JSON (de)serialization. Parsing starts from default_config(); the document
/// must carry schema_version = 1; unknown keys are errors.
ScenarioConfig config_from_json_text(const std::string& text);
ScenarioConfig config_from_json_file(const std::filesystem::path& path);
std::string config_to_json_text(const ScenarioConfig& cfg);
void write_config_snapshot(const std::filesystem::path& path,
                           const ScenarioConfig& cfg);

/// Reference trajectory: quadrature sinusoids tracing a circle, exactly
/// periodic in `period_s` (computed on the wrapped phase, so
/// reference(t + period) == reference(t) to the bit).
std::pair<double, double> reference(double t_s, double period_s, double amp_x,
                                    double amp_y);

/// Plant + controller + actuator state carried across contiguous runs.
struct CarriedState {
  plant::PlantState plant;
  control::ControllerState ctl_x;
  control::ControllerState ctl_y;
  double actuator_u_x = 0.0;  // held voltage, 0 until first delivery
  double actuator_u_y = 0.0;
};

/// All zeros except the ball starts at (0, amplitude_y), on the reference at
/// t = 0.
CarriedState initial_state(const ScenarioConfig& cfg);

struct RunOutput {
  std::vector<TraceRecord> controller_trace;
  std::vector<netem::PacketRecord> packet_trace;
  CarriedState final_state;
  bool diverged = false;
  std::string diagnostic;  // populated when diverged
};

/// Executes run `run_index` of the scenario over global time
/// [run_index*duration, (run_index+1)*duration), starting from `start`.
/// The network is built fresh with the seed derived from (master_seed,
/// scenario_id, run_index); both stations re-register with the name service
/// on h1 before sensor traffic starts. Divergence stops the run and returns
/// the partial traces with `diverged` set.
RunOutput run_experiment(const ScenarioConfig& cfg, int run_index,
                         const CarriedState& start);

/// Convenience overload: run 0 semantics from the canonical initial state.
RunOutput run_experiment(const ScenarioConfig& cfg, int run_index);

/// Runs the whole scenario in memory, invoking the consumer once per run in
/// order. State carries across runs per cfg.contiguous_runs. Stops after a
/// diverged run. Returns false when any run diverged.
bool for_each_run(const ScenarioConfig& cfg,
                  const std::function<void(int, RunOutput&&)>& consumer);

struct ScenarioResult {
  std::vector<std::filesystem::path> run_dirs;
  bool diverged = false;
  int diverged_run = -1;
  std::string diagnostic;
};

/// Runs the scenario and persists out_dir/<scenario_id>/run_<k>/
/// {controller.csv, packets.csv, config.snapshot.json}. Refuses to overwrite
/// an existing scenario directory unless force. jobs > 1 parallelizes runs
/// only when runs are independent (contiguous_runs = false); contiguous runs
/// are inherently sequential. Partial traces of a diverged run are persisted.
ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const std::filesystem::path& out_dir,
                            bool force = false, int jobs = 1);

/// Reads one run directory back into per-run sample sets (one per
/// collection: a single pooled set, or one per axis). Throws
/// MissingDataError when controller.csv is absent, ConfigError when the
/// snapshot is unreadable.
std::vector<analysis::ErrorSampleSet> load_run_samples(
    const std::filesystem::path& run_dir, analysis::Pooling pooling,
    analysis::ErrorMetric metric);

/// The 4-runs-of-one-scenario view the comparison protocols consume: all
/// runs' sample sets for one collection.
struct SampleCollection {
  std::string scenario_id;
  std::string collection;  // "pooled", "x", or "y"
  std::vector<analysis::ErrorSampleSet> runs;
};

/// Loads every run_<k> subdirectory (k = 0,1,... with no gaps) of a scenario
/// directory, in run order, grouped by collection. Throws MissingDataError
/// when no runs are present.
std::vector<SampleCollection> load_scenario_samples(
    const std::filesystem::path& scenario_dir, analysis::Pooling pooling,
    analysis::ErrorMetric metric);

/// Reads the scenario id / period recorded in a run's config snapshot.
ScenarioConfig load_run_config(const std::filesystem::path& run_dir);

}  // namespace plateloop::runner
