# Copyright 2026 plateloop authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Deterministic ball-on-plate control loop over an emulated star network.

The heavy lifting lives in the compiled `_plateloop` extension; this package
re-exports its public surface.
"""

from ._plateloop import (
    ComparisonMatrix,
    ConfigError,
    ErrorSampleSet,
    HistogramBin,
    KsResult,
    LinkParams,
    MissingDataError,
    MotorCoefficients,
    PacketRecord,
    PairKs,
    PdGains,
    RunOutput,
    SampleCollection,
    ScenarioConfig,
    ScenarioResult,
    Topology,
    TraceRecord,
    __version__,
    config_from_json_text,
    config_to_json_text,
    cross_matrix,
    default_config,
    ecdf_export,
    histogram,
    kolmogorov_asymptotic_sf,
    ks_asymptotic_pvalue,
    ks_exact_pvalue,
    ks_two_sample,
    load_run_samples,
    load_scenario_samples,
    period_errors,
    read_controller_csv,
    read_packets_csv,
    reference,
    run_experiment,
    run_scenario,
    selfsim_matrix,
)

__all__ = [
    "ComparisonMatrix",
    "ConfigError",
    "ErrorSampleSet",
    "HistogramBin",
    "KsResult",
    "LinkParams",
    "MissingDataError",
    "MotorCoefficients",
    "PacketRecord",
    "PairKs",
    "PdGains",
    "RunOutput",
    "SampleCollection",
    "ScenarioConfig",
    "ScenarioResult",
    "Topology",
    "TraceRecord",
    "__version__",
    "config_from_json_text",
    "config_to_json_text",
    "cross_matrix",
    "default_config",
    "ecdf_export",
    "histogram",
    "kolmogorov_asymptotic_sf",
    "ks_asymptotic_pvalue",
    "ks_exact_pvalue",
    "ks_two_sample",
    "load_run_samples",
    "load_scenario_samples",
    "period_errors",
    "read_controller_csv",
    "read_packets_csv",
    "reference",
    "run_experiment",
    "run_scenario",
    "selfsim_matrix",
]
