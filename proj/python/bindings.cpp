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

// Python bindings over the simulation core: configuration, experiment
// execution, trace persistence, and the KS statistics pipeline.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "plateloop/analysis.hpp"
#include "plateloop/netem.hpp"
#include "plateloop/plant.hpp"
#include "plateloop/runner.hpp"
#include "plateloop/trace.hpp"

namespace py = pybind11;
using namespace plateloop;

namespace {

analysis::Pooling pooling_arg(const std::string& name) {
  return analysis::parse_pooling(name);
}

analysis::ErrorMetric metric_arg(const std::string& name) {
  return analysis::parse_metric(name);
}

}  // namespace

PYBIND11_MODULE(_plateloop, m) {
  m.doc() =
      "Deterministic ball-on-plate control loop over an emulated star "
      "network, with a two-sample KS comparison pipeline";
  m.attr("__version__") = "0.1.0";

  py::register_exception<runner::ConfigError>(m, "ConfigError",
                                              PyExc_ValueError);
  py::register_exception<runner::MissingDataError>(m, "MissingDataError",
                                                   PyExc_FileNotFoundError);

  // --- configuration ------------------------------------------------------
  py::class_<plant::MotorCoefficients>(m, "MotorCoefficients")
      .def(py::init<>())
      .def_readwrite("b1", &plant::MotorCoefficients::b1)
      .def_readwrite("b0", &plant::MotorCoefficients::b0);

  py::class_<netem::LinkParams>(m, "LinkParams")
      .def(py::init<>())
      .def_readwrite("delay_s", &netem::LinkParams::delay_s)
      .def_readwrite("jitter_s", &netem::LinkParams::jitter_s)
      .def_readwrite("loss", &netem::LinkParams::loss)
      .def_readwrite("bandwidth_bps", &netem::LinkParams::bandwidth_bps);

  py::class_<netem::Topology>(m, "Topology")
      .def(py::init<>())
      .def_readwrite("h1", &netem::Topology::h1)
      .def_readwrite("sta1", &netem::Topology::sta1)
      .def_readwrite("sta2", &netem::Topology::sta2);

  py::class_<control::PdGains>(m, "PdGains")
      .def(py::init<>())
      .def_readwrite("kp", &control::PdGains::kp)
      .def_readwrite("kd", &control::PdGains::kd);

  py::class_<runner::ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("scenario_id", &runner::ScenarioConfig::scenario_id)
      .def_readwrite("master_seed", &runner::ScenarioConfig::master_seed)
      .def_readwrite("duration_s", &runner::ScenarioConfig::duration_s)
      .def_readwrite("runs", &runner::ScenarioConfig::runs)
      .def_readwrite("period_s", &runner::ScenarioConfig::period_s)
      .def_readwrite("sensor_rate_hz", &runner::ScenarioConfig::sensor_rate_hz)
      .def_readwrite("plant_dt_s", &runner::ScenarioConfig::plant_dt_s)
      .def_readwrite("motor", &runner::ScenarioConfig::motor)
      .def_readwrite("topology", &runner::ScenarioConfig::topology)
      .def_readwrite("x_outer", &runner::ScenarioConfig::x_outer)
      .def_readwrite("x_inner", &runner::ScenarioConfig::x_inner)
      .def_readwrite("y_outer", &runner::ScenarioConfig::y_outer)
      .def_readwrite("y_inner", &runner::ScenarioConfig::y_inner)
      .def_readwrite("angle_limit_rad",
                     &runner::ScenarioConfig::angle_limit_rad)
      .def_readwrite("rto_s", &runner::ScenarioConfig::rto_s)
      .def_readwrite("amplitude_x_m", &runner::ScenarioConfig::amplitude_x_m)
      .def_readwrite("amplitude_y_m", &runner::ScenarioConfig::amplitude_y_m)
      .def_readwrite("sensor_msg_bytes",
                     &runner::ScenarioConfig::sensor_msg_bytes)
      .def_readwrite("control_msg_bytes",
                     &runner::ScenarioConfig::control_msg_bytes)
      .def_readwrite("blowup_bound", &runner::ScenarioConfig::blowup_bound)
      .def_readwrite("contiguous_runs",
                     &runner::ScenarioConfig::contiguous_runs)
      .def("validate", &runner::ScenarioConfig::validate);

  m.def("default_config", &runner::default_config,
        "Stabilizing defaults for the default plant and network");
  m.def("config_from_json_text", &runner::config_from_json_text,
        py::arg("text"));
  m.def("config_to_json_text", &runner::config_to_json_text, py::arg("config"));

  // --- traces and execution ------------------------------------------------
  py::class_<TraceRecord>(m, "TraceRecord")
      .def_readonly("time_s", &TraceRecord::time_s)
      .def_readonly("ref_x_m", &TraceRecord::ref_x_m)
      .def_readonly("ref_y_m", &TraceRecord::ref_y_m)
      .def_readonly("ball_x_m", &TraceRecord::ball_x_m)
      .def_readonly("ball_y_m", &TraceRecord::ball_y_m)
      .def_readonly("roll_rad", &TraceRecord::roll_rad)
      .def_readonly("pitch_rad", &TraceRecord::pitch_rad)
      .def_readonly("u_x_v", &TraceRecord::u_x_v)
      .def_readonly("u_y_v", &TraceRecord::u_y_v);

  py::class_<netem::PacketRecord>(m, "PacketRecord")
      .def_readonly("flow_id", &netem::PacketRecord::flow_id)
      .def_readonly("seq", &netem::PacketRecord::seq)
      .def_readonly("size_bytes", &netem::PacketRecord::size_bytes)
      .def_readonly("send_time_s", &netem::PacketRecord::send_time_s)
      .def_readonly("deliver_time_s", &netem::PacketRecord::deliver_time_s)
      .def_readonly("attempts", &netem::PacketRecord::attempts);

  py::class_<runner::RunOutput>(m, "RunOutput")
      .def_readonly("controller_trace", &runner::RunOutput::controller_trace)
      .def_readonly("packet_trace", &runner::RunOutput::packet_trace)
      .def_readonly("diverged", &runner::RunOutput::diverged)
      .def_readonly("diagnostic", &runner::RunOutput::diagnostic);

  py::class_<runner::ScenarioResult>(m, "ScenarioResult")
      .def_readonly("run_dirs", &runner::ScenarioResult::run_dirs)
      .def_readonly("diverged", &runner::ScenarioResult::diverged)
      .def_readonly("diverged_run", &runner::ScenarioResult::diverged_run)
      .def_readonly("diagnostic", &runner::ScenarioResult::diagnostic);

  m.def("reference", &runner::reference, py::arg("t_s"), py::arg("period_s"),
        py::arg("amp_x"), py::arg("amp_y"),
        "Reference trajectory point (x, y) at time t");
  m.def(
      "run_experiment",
      [](const runner::ScenarioConfig& cfg, int run_index) {
        return runner::run_experiment(cfg, run_index);
      },
      py::arg("config"), py::arg("run_index") = 0,
      py::call_guard<py::gil_scoped_release>(),
      "Execute one run from the canonical initial state");
  m.def("run_scenario", &runner::run_scenario, py::arg("config"),
        py::arg("out_dir"), py::arg("force") = false, py::arg("jobs") = 1,
        py::call_guard<py::gil_scoped_release>(),
        "Execute all runs and persist run directories");

  // --- statistics -----------------------------------------------------------
  py::class_<analysis::ErrorSampleSet>(m, "ErrorSampleSet")
      .def_readonly("scenario_id", &analysis::ErrorSampleSet::scenario_id)
      .def_readonly("run_index", &analysis::ErrorSampleSet::run_index)
      .def_readonly("collection", &analysis::ErrorSampleSet::collection)
      .def_readonly("samples", &analysis::ErrorSampleSet::samples);

  py::class_<runner::SampleCollection>(m, "SampleCollection")
      .def_readonly("scenario_id", &runner::SampleCollection::scenario_id)
      .def_readonly("collection", &runner::SampleCollection::collection)
      .def_readonly("runs", &runner::SampleCollection::runs);

  py::class_<analysis::KsResult>(m, "KsResult")
      .def_readonly("d_stat", &analysis::KsResult::d_stat)
      .def_readonly("p_value", &analysis::KsResult::p_value)
      .def_readonly("n", &analysis::KsResult::n)
      .def_readonly("m", &analysis::KsResult::m)
      .def_readonly("rejected", &analysis::KsResult::rejected);

  py::class_<analysis::PairKs>(m, "PairKs")
      .def_readonly("index_a", &analysis::PairKs::index_a)
      .def_readonly("index_b", &analysis::PairKs::index_b)
      .def_readonly("ks", &analysis::PairKs::ks);

  py::class_<analysis::ComparisonMatrix>(m, "ComparisonMatrix")
      .def_readonly("pairs", &analysis::ComparisonMatrix::pairs)
      .def_readonly("rejections", &analysis::ComparisonMatrix::rejections);

  py::class_<analysis::HistogramBin>(m, "HistogramBin")
      .def_readonly("lo", &analysis::HistogramBin::lo)
      .def_readonly("hi", &analysis::HistogramBin::hi)
      .def_readonly("count", &analysis::HistogramBin::count);

  m.def(
      "period_errors",
      [](const std::vector<TraceRecord>& trace, double period_s,
         const std::string& pooling, const std::string& metric) {
        return analysis::period_errors(trace, period_s, pooling_arg(pooling),
                                       metric_arg(metric));
      },
      py::arg("trace"), py::arg("period_s"), py::arg("pooling") = "radial",
      py::arg("metric") = "abs",
      "Time-weighted per-period error sample sets of a controller trace");
  m.def("ks_two_sample", &analysis::ks_two_sample, py::arg("a"), py::arg("b"),
        py::arg("alpha") = 0.001,
        "Two-sample KS test; exact permutation p-value for small pairs");
  m.def("ks_exact_pvalue", &analysis::ks_exact_pvalue, py::arg("a"),
        py::arg("b"));
  m.def("ks_asymptotic_pvalue", &analysis::ks_asymptotic_pvalue,
        py::arg("d_stat"), py::arg("n"), py::arg("m"));
  m.def("kolmogorov_asymptotic_sf", &analysis::kolmogorov_asymptotic_sf,
        py::arg("lambda_"));
  m.def("selfsim_matrix", &analysis::selfsim_matrix, py::arg("runs"),
        py::arg("alpha") = 0.001,
        "All 6 unordered pairs among one scenario's 4 runs");
  m.def("cross_matrix", &analysis::cross_matrix, py::arg("a"), py::arg("b"),
        py::arg("alpha") = 0.001,
        "All 16 ordered pairs between two scenarios' runs");
  m.def("ecdf_export", &analysis::ecdf_export, py::arg("samples"));
  m.def("histogram", &analysis::histogram, py::arg("samples"),
        py::arg("bins") = 30);

  // --- persistence ----------------------------------------------------------
  m.def(
      "load_run_samples",
      [](const std::filesystem::path& run_dir, const std::string& pooling,
         const std::string& metric) {
        return runner::load_run_samples(run_dir, pooling_arg(pooling),
                                        metric_arg(metric));
      },
      py::arg("run_dir"), py::arg("pooling") = "radial",
      py::arg("metric") = "abs");
  m.def(
      "load_scenario_samples",
      [](const std::filesystem::path& scenario_dir, const std::string& pooling,
         const std::string& metric) {
        return runner::load_scenario_samples(scenario_dir,
                                             pooling_arg(pooling),
                                             metric_arg(metric));
      },
      py::arg("scenario_dir"), py::arg("pooling") = "radial",
      py::arg("metric") = "abs");
  m.def(
      "read_controller_csv",
      [](const std::filesystem::path& path) {
        return read_controller_csv(path);
      },
      py::arg("path"));
  m.def(
      "read_packets_csv",
      [](const std::filesystem::path& path) { return read_packets_csv(path); },
      py::arg("path"));
}
