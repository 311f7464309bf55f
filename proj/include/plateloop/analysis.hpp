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

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "plateloop/trace.hpp"

namespace plateloop::analysis {

/// How the tracking error is summarized inside each period window. All three
/// are time-weighted over the piecewise-constant error signal between
/// controller updates.
enum class ErrorMetric { kAbs, kSigned, kRmse };

/// How the two axes combine into sample sets. kRadial summarizes both axes
/// as one sample per period (the time-weighted mean of the planar error
/// norm) and is the default for the comparison matrices: the axes are
/// strongly correlated inside a period (a retransmission stall elevates
/// both at once), so concatenating them (kPooled) feeds the KS test
/// near-duplicated data and makes it reject far above the nominal level.
enum class Pooling { kRadial, kPooled, kPerAxis };

enum class Axis { kX, kY };

ErrorMetric parse_metric(const std::string& name);  // abs | signed | rmse
Pooling parse_pooling(const std::string& name);     // radial|pooled|per-axis
std::string metric_name(ErrorMetric m);
std::string pooling_name(Pooling p);

struct ErrorSampleSet {
  std::string scenario_id;
  int run_index = 0;
  std::string collection = "radial";  // "radial", "pooled", "x", or "y"
  std::vector<double> samples;
};

/// Per-period summaries for one axis. Windows are [anchor + k*period,
/// anchor + (k+1)*period) with anchor the period boundary at or before the
/// first row; the trace's last row extends to the end of its window. A window
/// containing no rows is a hard error (broken trace). The error signal is
/// held constant between rows, so the result is invariant to row density.
std::vector<double> period_errors_axis(const std::vector<TraceRecord>& trace,
                                       double period_s, Axis axis,
                                       ErrorMetric metric);

/// Per-period summaries of the planar error norm sqrt(ex^2 + ey^2), windowed
/// exactly like period_errors_axis. kAbs averages the norm; kRmse takes the
/// root of the mean squared norm. kSigned is undefined for the norm and
/// throws std::invalid_argument.
std::vector<double> period_errors_radial(const std::vector<TraceRecord>& trace,
                                         double period_s, ErrorMetric metric);

/// One sample set per collection: radial mode yields a single set with one
/// sample per period (planar error norm); pooled mode yields a single set
/// with X samples followed by Y samples; per-axis mode yields two sets
/// ("x", "y"). scenario_id/run_index are left for the caller to fill.
std::vector<ErrorSampleSet> period_errors(const std::vector<TraceRecord>& trace,
                                          double period_s, Pooling pooling,
                                          ErrorMetric metric);

struct KsResult {
  double d_stat = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
  std::size_t m = 0;
  bool rejected = false;  // p_value < alpha
};

/// Exact two-sample Kolmogorov-Smirnov statistic (sorted merge, ECDF
/// difference evaluated after all copies of each tied value are consumed).
/// The p-value is the exact permutation probability when n*m <= 1e4 and the
/// asymptotic approximation above that, mirroring the usual auto policy of
/// statistics toolkits. alpha defaults to the significance level used
/// throughout the reports.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                       double alpha = 0.001);

/// Asymptotic Kolmogorov survival function Q(lambda) =
/// 2*sum_{k>=1} (-1)^(k-1) exp(-2 k^2 lambda^2), series truncated when a term
/// falls below 1e-12, result clamped to [0,1].
double kolmogorov_asymptotic_sf(double lambda);

/// p-value for an observed D via Q with the finite-sample correction
/// lambda = (sqrt(ne) + 0.12 + 0.11/sqrt(ne)) * D, ne = n*m/(n+m).
double ks_asymptotic_pvalue(double d_stat, std::size_t n, std::size_t m);

/// Exact permutation p-value P(D >= d_observed) under the null that both
/// samples come from one distribution: counts, over all C(n+m, n) label
/// assignments to the pooled (tie-aware) values, the fraction reaching the
/// observed statistic. Lattice dynamic program with integer barrier
/// arithmetic; intended as a cross-check, restricted to n*m <= 1e4.
double ks_exact_pvalue(std::vector<double> a, std::vector<double> b);

struct PairKs {
  int index_a = 0;
  int index_b = 0;
  KsResult ks;
};

struct ComparisonMatrix {
  std::vector<PairKs> pairs;
  int rejections = 0;
};

/// All C(4,2)=6 unordered pairs among one scenario's 4 runs.
ComparisonMatrix selfsim_matrix(const std::vector<ErrorSampleSet>& runs,
                                double alpha);

/// All 4x4=16 ordered cross pairs between two scenarios' runs.
ComparisonMatrix cross_matrix(const std::vector<ErrorSampleSet>& a,
                              const std::vector<ErrorSampleSet>& b,
                              double alpha);

/// Right-continuous ECDF step points: one (value, cumulative fraction) pair
/// per distinct value, ascending, last fraction exactly 1.
std::vector<std::pair<double, double>> ecdf_export(std::vector<double> samples);

struct HistogramBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
};

/// Equal-width bins over [min, max]; the max value lands in the last bin.
/// Degenerate all-equal input yields one occupied zero-width bin.
std::vector<HistogramBin> histogram(const std::vector<double>& samples,
                                    int bins);

}  // namespace plateloop::analysis
