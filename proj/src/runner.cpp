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

#include "plateloop/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <initializer_list>
#include <mutex>
#include <numbers>
#include <thread>

#include "plateloop/rng.hpp"

namespace plateloop::runner {

namespace fs = std::filesystem;

std::pair<double, double> reference(double t_s, double period_s, double amp_x,
                                    double amp_y) {
  if (!(period_s > 0.0)) {
    throw std::invalid_argument("reference: period must be positive");
  }
  // fmod is exact, so the phase (and thus the output) repeats bit-for-bit
  // whenever t + period is representable.
  double tau = std::fmod(t_s, period_s);
  if (tau < 0.0) tau += period_s;
  const double phase = 2.0 * std::numbers::pi * (tau / period_s);
  return {amp_x * std::sin(phase), amp_y * std::cos(phase)};
}

CarriedState initial_state(const ScenarioConfig& cfg) {
  CarriedState s;
  s.plant.y.ball_pos = cfg.amplitude_y_m;  // on the reference at t = 0
  return s;
}

namespace {

constexpr std::size_t kRegisterMsgBytes = 32;

std::vector<std::uint8_t> pack_doubles(std::initializer_list<double> values) {
  std::vector<std::uint8_t> out(values.size() * sizeof(double));
  std::size_t offset = 0;
  for (double v : values) {
    std::memcpy(out.data() + offset, &v, sizeof v);
    offset += sizeof v;
  }
  return out;
}

double unpack_double(const std::vector<std::uint8_t>& payload,
                     std::size_t index) {
  double v = 0.0;
  std::memcpy(&v, payload.data() + index * sizeof(double), sizeof v);
  return v;
}

/// One run of the closed loop on one global clock. Plant time lives on the
/// grid index*plant_dt (recomputed as a product each step, never
/// accumulated); events execute in (time, id) order and the plant is rolled
/// forward to each event's time before it fires.
class Engine {
 public:
  Engine(const ScenarioConfig& cfg, int run_index, const CarriedState& start)
      : cfg_(cfg),
        run_index_(run_index),
        t0_(run_index * cfg.duration_s),
        t_end_((run_index + 1) * cfg.duration_s),
        tick_dt_(1.0 / cfg.sensor_rate_hz),
        disc_(plant::build_discretization(cfg.motor, cfg.plant_dt_s)),
        net_(queue_, cfg.topology, cfg.rto_s,
             derive_run_seed(cfg.master_seed, cfg.scenario_id, run_index)),
        st_(start),
        grid_index_(std::llround(start.plant.time / cfg.plant_dt_s)) {
    if (std::fabs(start.plant.time - t0_) > cfg.plant_dt_s + 1e-9) {
      throw std::invalid_argument(
          "start state time does not match the run window");
    }
  }

  RunOutput run() {
    open_flows();
    queue_.schedule(t0_, [this] { net_.send("register/sta1", {}); });
    queue_.schedule(t0_, [this] { net_.send("register/sta2", {}); });
    try {
      while (!queue_.empty() && queue_.next_time() < t_end_) {
        advance_plant_to(queue_.next_time());
        queue_.run_one();
      }
      advance_plant_to(t_end_);
    } catch (const plant::DivergenceError& e) {
      out_.diverged = true;
      out_.diagnostic =
          "run " + std::to_string(run_index_) + " diverged: " + e.what();
    }
    out_.final_state = st_;
    out_.packet_trace = net_.take_packet_trace();
    return std::move(out_);
  }

 private:
  void open_flows() {
    // Name-service handshake with h1: one registration/ack pair per station,
    // after which h1 is silent. Sampling is gated on both acks.
    net_.open_flow("register/sta1", netem::HostId::sta1, netem::HostId::h1,
                   kRegisterMsgBytes,
                   [this](const std::vector<netem::Message>& batch) {
                     for (std::size_t k = 0; k < batch.size(); ++k) {
                       net_.send("register_ack/sta1", {});
                     }
                   });
    net_.open_flow("register/sta2", netem::HostId::sta2, netem::HostId::h1,
                   kRegisterMsgBytes,
                   [this](const std::vector<netem::Message>& batch) {
                     for (std::size_t k = 0; k < batch.size(); ++k) {
                       net_.send("register_ack/sta2", {});
                     }
                   });
    net_.open_flow("register_ack/sta1", netem::HostId::h1,
                   netem::HostId::sta1, kRegisterMsgBytes,
                   [this](const std::vector<netem::Message>&) {
                     sta1_ready_ = true;
                     maybe_start_sampling();
                   });
    net_.open_flow("register_ack/sta2", netem::HostId::h1,
                   netem::HostId::sta2, kRegisterMsgBytes,
                   [this](const std::vector<netem::Message>&) {
                     sta2_ready_ = true;
                     maybe_start_sampling();
                   });
    net_.open_flow("sensor", netem::HostId::sta2, netem::HostId::sta1,
                   cfg_.sensor_msg_bytes,
                   [this](const std::vector<netem::Message>& batch) {
                     on_sensor_batch(batch);
                   });
    net_.open_flow("control", netem::HostId::sta1, netem::HostId::sta2,
                   cfg_.control_msg_bytes,
                   [this](const std::vector<netem::Message>& batch) {
                     const netem::Message& last = batch.back();
                     st_.actuator_u_x = unpack_double(last.payload, 0);
                     st_.actuator_u_y = unpack_double(last.payload, 1);
                   });
  }

  void advance_plant_to(double t) {
    while (true) {
      const double next_t = static_cast<double>(grid_index_ + 1) *
                            cfg_.plant_dt_s;
      if (next_t > t) break;
      st_.plant.x = plant::step_axis(st_.plant.x, st_.actuator_u_x, disc_,
                                     cfg_.angle_limit_rad, cfg_.blowup_bound,
                                     next_t);
      st_.plant.y = plant::step_axis(st_.plant.y, st_.actuator_u_y, disc_,
                                     cfg_.angle_limit_rad, cfg_.blowup_bound,
                                     next_t);
      ++grid_index_;
      st_.plant.time = next_t;
    }
  }

  void maybe_start_sampling() {
    if (!sta1_ready_ || !sta2_ready_ || sampling_started_) return;
    sampling_started_ = true;
    // Smallest sensor grid point at or after handshake completion, decided
    // with exact comparisons so the first send never precedes completion.
    const double now = queue_.now();
    auto j = static_cast<std::int64_t>(std::ceil(now / tick_dt_));
    while (static_cast<double>(j) * tick_dt_ < now) ++j;
    while (j > 0 && static_cast<double>(j - 1) * tick_dt_ >= now) --j;
    schedule_tick(j);
  }

  void schedule_tick(std::int64_t j) {
    const double t = static_cast<double>(j) * tick_dt_;
    if (t >= t_end_) return;
    queue_.schedule(t, [this, j] { on_tick(j); });
  }

  void on_tick(std::int64_t j) {
    net_.send("sensor",
              pack_doubles({st_.plant.x.ball_pos, st_.plant.y.ball_pos,
                            st_.plant.x.plate_angle, st_.plant.y.plate_angle}));
    schedule_tick(j + 1);
  }

  void on_sensor_batch(const std::vector<netem::Message>& batch) {
    const netem::Message& last = batch.back();
    meas_ball_x_ = unpack_double(last.payload, 0);
    meas_ball_y_ = unpack_double(last.payload, 1);
    meas_roll_ = unpack_double(last.payload, 2);
    meas_pitch_ = unpack_double(last.payload, 3);
    // Defer the update to the end of the current instant: release batches
    // landing at exactly the same time coalesce into one update acting on
    // the newest measurement, so successive updates always have dt > 0.
    if (!update_pending_) {
      update_pending_ = true;
      queue_.schedule(queue_.now(), [this] { controller_update(); });
    }
  }

  void controller_update() {
    update_pending_ = false;
    const double now = queue_.now();
    const auto [ref_x, ref_y] = reference(now, cfg_.period_s,
                                          cfg_.amplitude_x_m,
                                          cfg_.amplitude_y_m);
    const double dt_x =
        st_.ctl_x.primed ? now - st_.ctl_x.last_update_time : tick_dt_;
    const double dt_y =
        st_.ctl_y.primed ? now - st_.ctl_y.last_update_time : tick_dt_;
    const double u_x = control::cascade_step(
        st_.ctl_x, ref_x, meas_ball_x_, meas_roll_, cfg_.x_outer,
        cfg_.x_inner, dt_x, cfg_.angle_limit_rad);
    st_.ctl_x.last_update_time = now;
    const double u_y = control::cascade_step(
        st_.ctl_y, ref_y, meas_ball_y_, meas_pitch_, cfg_.y_outer,
        cfg_.y_inner, dt_y, cfg_.angle_limit_rad);
    st_.ctl_y.last_update_time = now;

    out_.controller_trace.push_back(TraceRecord{now, ref_x, ref_y,
                                                meas_ball_x_, meas_ball_y_,
                                                meas_roll_, meas_pitch_, u_x,
                                                u_y});
    net_.send("control", pack_doubles({u_x, u_y}));
  }

  const ScenarioConfig& cfg_;
  int run_index_;
  double t0_;
  double t_end_;
  double tick_dt_;
  plant::AxisDiscretization disc_;
  netem::EventQueue queue_;
  netem::Network net_;
  CarriedState st_;
  std::int64_t grid_index_;

  bool sta1_ready_ = false;
  bool sta2_ready_ = false;
  bool sampling_started_ = false;
  bool update_pending_ = false;
  double meas_ball_x_ = 0.0;
  double meas_ball_y_ = 0.0;
  double meas_roll_ = 0.0;
  double meas_pitch_ = 0.0;

  RunOutput out_;
};

void write_run_dir(const fs::path& dir, const ScenarioConfig& cfg,
                   const RunOutput& out) {
  fs::create_directories(dir);
  write_controller_csv(dir / "controller.csv", out.controller_trace);
  write_packets_csv(dir / "packets.csv", out.packet_trace);
  write_config_snapshot(dir / "config.snapshot.json", cfg);
}

int run_index_from_dir(const fs::path& run_dir) {
  const std::string name = run_dir.filename().string();
  const auto underscore = name.rfind('_');
  if (underscore == std::string::npos) return 0;
  try {
    return std::stoi(name.substr(underscore + 1));
  } catch (const std::exception&) {
    return 0;
  }
}

}  // namespace

RunOutput run_experiment(const ScenarioConfig& cfg, int run_index,
                         const CarriedState& start) {
  cfg.validate();
  if (run_index < 0 || run_index >= cfg.runs) {
    throw std::invalid_argument("run index out of range");
  }
  return Engine(cfg, run_index, start).run();
}

RunOutput run_experiment(const ScenarioConfig& cfg, int run_index) {
  cfg.validate();
  CarriedState start = initial_state(cfg);
  start.plant.time = run_index * cfg.duration_s;
  return run_experiment(cfg, run_index, start);
}

bool for_each_run(const ScenarioConfig& cfg,
                  const std::function<void(int, RunOutput&&)>& consumer) {
  cfg.validate();
  CarriedState state = initial_state(cfg);
  for (int k = 0; k < cfg.runs; ++k) {
    if (!cfg.contiguous_runs) {
      state = initial_state(cfg);
      state.plant.time = k * cfg.duration_s;
    }
    RunOutput out = run_experiment(cfg, k, state);
    const bool diverged = out.diverged;
    state = out.final_state;
    consumer(k, std::move(out));
    if (diverged) return false;
  }
  return true;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg,
                            const fs::path& out_dir, bool force, int jobs) {
  cfg.validate();
  const fs::path scenario_dir = out_dir / cfg.scenario_id;
  if (fs::exists(scenario_dir)) {
    if (!force) {
      throw ConfigError("output directory exists: " + scenario_dir.string() +
                        " (use --force to overwrite)");
    }
    fs::remove_all(scenario_dir);
  }
  fs::create_directories(scenario_dir);

  auto dir_of = [&](int k) {
    return scenario_dir / ("run_" + std::to_string(k));
  };

  ScenarioResult result;
  if (cfg.contiguous_runs || jobs <= 1 || cfg.runs == 1) {
    // Contiguous runs share state, so they are inherently sequential.
    for_each_run(cfg, [&](int k, RunOutput&& out) {
      write_run_dir(dir_of(k), cfg, out);
      result.run_dirs.push_back(dir_of(k));
      if (out.diverged && !result.diverged) {
        result.diverged = true;
        result.diverged_run = k;
        result.diagnostic = out.diagnostic;
      }
    });
    return result;
  }

  // Cold-start runs are independent; fan them out across workers.
  std::atomic<int> next{0};
  std::mutex mu;
  std::exception_ptr first_error;
  struct Done {
    int run = -1;
    bool diverged = false;
    std::string diagnostic;
  };
  std::vector<Done> done;

  auto worker = [&] {
    for (int k = next.fetch_add(1); k < cfg.runs; k = next.fetch_add(1)) {
      try {
        RunOutput out = run_experiment(cfg, k);
        write_run_dir(dir_of(k), cfg, out);
        std::lock_guard<std::mutex> lock(mu);
        done.push_back(Done{k, out.diverged, out.diagnostic});
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  const int workers = std::min(jobs, cfg.runs);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  std::sort(done.begin(), done.end(),
            [](const Done& a, const Done& b) { return a.run < b.run; });
  for (const Done& d : done) {
    result.run_dirs.push_back(dir_of(d.run));
    if (d.diverged && !result.diverged) {
      result.diverged = true;
      result.diverged_run = d.run;
      result.diagnostic = d.diagnostic;
    }
  }
  return result;
}

ScenarioConfig load_run_config(const fs::path& run_dir) {
  const fs::path snapshot = run_dir / "config.snapshot.json";
  if (!fs::exists(snapshot)) {
    throw MissingDataError("missing config snapshot: " + snapshot.string());
  }
  return config_from_json_file(snapshot);
}

std::vector<analysis::ErrorSampleSet> load_run_samples(
    const fs::path& run_dir, analysis::Pooling pooling,
    analysis::ErrorMetric metric) {
  const fs::path trace_path = run_dir / "controller.csv";
  if (!fs::exists(trace_path)) {
    throw MissingDataError("missing trace: " + trace_path.string());
  }
  const ScenarioConfig cfg = load_run_config(run_dir);
  const std::vector<TraceRecord> trace = read_controller_csv(trace_path);
  if (trace.empty()) {
    throw MissingDataError("trace has no rows: " + trace_path.string());
  }
  std::vector<analysis::ErrorSampleSet> sets =
      analysis::period_errors(trace, cfg.period_s, pooling, metric);
  const int run_index = run_index_from_dir(run_dir);
  for (auto& s : sets) {
    s.scenario_id = cfg.scenario_id;
    s.run_index = run_index;
  }
  return sets;
}

std::vector<SampleCollection> load_scenario_samples(
    const fs::path& scenario_dir, analysis::Pooling pooling,
    analysis::ErrorMetric metric) {
  if (!fs::exists(scenario_dir)) {
    throw MissingDataError("no such scenario directory: " +
                           scenario_dir.string());
  }
  std::vector<std::vector<analysis::ErrorSampleSet>> per_run;
  for (int k = 0;; ++k) {
    const fs::path run_dir = scenario_dir / ("run_" + std::to_string(k));
    if (!fs::exists(run_dir)) break;
    per_run.push_back(load_run_samples(run_dir, pooling, metric));
  }
  if (per_run.empty()) {
    throw MissingDataError("no run directories under " +
                           scenario_dir.string());
  }

  std::vector<SampleCollection> out;
  for (std::size_t c = 0; c < per_run.front().size(); ++c) {
    SampleCollection sc;
    sc.scenario_id = per_run.front()[c].scenario_id;
    sc.collection = per_run.front()[c].collection;
    for (auto& run_sets : per_run) {
      sc.runs.push_back(std::move(run_sets[c]));
    }
    out.push_back(std::move(sc));
  }
  return out;
}

}  // namespace plateloop::runner
