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

#include "plateloop/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>

namespace plateloop::analysis {

ErrorMetric parse_metric(const std::string& name) {
  if (name == "abs") return ErrorMetric::kAbs;
  if (name == "signed") return ErrorMetric::kSigned;
  if (name == "rmse") return ErrorMetric::kRmse;
  throw std::invalid_argument("unknown metric: " + name +
                              " (expected abs, signed, or rmse)");
}

Pooling parse_pooling(const std::string& name) {
  if (name == "radial") return Pooling::kRadial;
  if (name == "pooled") return Pooling::kPooled;
  if (name == "per-axis") return Pooling::kPerAxis;
  throw std::invalid_argument("unknown pooling: " + name +
                              " (expected radial, pooled, or per-axis)");
}

std::string metric_name(ErrorMetric m) {
  switch (m) {
    case ErrorMetric::kAbs:
      return "abs";
    case ErrorMetric::kSigned:
      return "signed";
    case ErrorMetric::kRmse:
      return "rmse";
  }
  return "abs";
}

std::string pooling_name(Pooling p) {
  switch (p) {
    case Pooling::kRadial:
      return "radial";
    case Pooling::kPooled:
      return "pooled";
    case Pooling::kPerAxis:
      return "per-axis";
  }
  return "radial";
}

namespace {

// Shared window integrator: time-weights row_value(row) over windows of
// period_s (signal held constant between rows), then returns the per-window
// mean, or the root of the mean when root_of_mean is set.
template <typename RowValue>
std::vector<double> period_windows(const std::vector<TraceRecord>& trace,
                                   double period_s, RowValue row_value,
                                   bool root_of_mean) {
  if (trace.empty()) {
    throw std::invalid_argument("period_errors: empty trace");
  }
  if (!(period_s > 0.0)) {
    throw std::invalid_argument("period_errors: period must be positive");
  }
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (!(trace[i].time_s > trace[i - 1].time_s)) {
      throw std::invalid_argument(
          "period_errors: trace times must be strictly increasing");
    }
  }

  const double t_first = trace.front().time_s;
  const double t_last = trace.back().time_s;
  const double anchor = std::floor(t_first / period_s) * period_s;
  const int n_windows =
      static_cast<int>(std::floor((t_last - anchor) / period_s)) + 1;
  const double horizon = anchor + n_windows * period_s;

  std::vector<double> integral(n_windows, 0.0);
  std::vector<double> covered(n_windows, 0.0);
  std::vector<std::size_t> rows(n_windows, 0);

  for (std::size_t i = 0; i < trace.size(); ++i) {
    const double seg_begin = trace[i].time_s;
    // The error signal holds each row's value until the next row; the last
    // row holds to the end of its window.
    const double seg_limit =
        i + 1 < trace.size() ? trace[i + 1].time_s : horizon;
    const double v = row_value(trace[i]);

    int w = static_cast<int>(std::floor((seg_begin - anchor) / period_s));
    w = std::clamp(w, 0, n_windows - 1);
    ++rows[w];

    double cursor = seg_begin;
    while (w < n_windows) {
      const double window_end = anchor + (w + 1) * period_s;
      const double seg_end = std::min(seg_limit, window_end);
      if (seg_end > cursor) {
        integral[w] += v * (seg_end - cursor);
        covered[w] += seg_end - cursor;
      }
      if (seg_end >= seg_limit) break;
      cursor = seg_end;
      ++w;
    }
  }

  std::vector<double> samples(n_windows);
  for (int w = 0; w < n_windows; ++w) {
    if (rows[w] == 0) {
      throw std::runtime_error("period_errors: window " + std::to_string(w) +
                               " contains no trace rows (broken trace)");
    }
    const double mean = integral[w] / covered[w];
    samples[w] = root_of_mean ? std::sqrt(mean) : mean;
  }
  return samples;
}

}  // namespace

std::vector<double> period_errors_axis(const std::vector<TraceRecord>& trace,
                                       double period_s, Axis axis,
                                       ErrorMetric metric) {
  auto row_value = [&](const TraceRecord& r) {
    const double e = axis == Axis::kX ? r.ref_x_m - r.ball_x_m
                                      : r.ref_y_m - r.ball_y_m;
    switch (metric) {
      case ErrorMetric::kAbs:
        return std::fabs(e);
      case ErrorMetric::kSigned:
        return e;
      case ErrorMetric::kRmse:
        return e * e;
    }
    return std::fabs(e);
  };
  return period_windows(trace, period_s, row_value,
                        metric == ErrorMetric::kRmse);
}

std::vector<double> period_errors_radial(const std::vector<TraceRecord>& trace,
                                         double period_s, ErrorMetric metric) {
  if (metric == ErrorMetric::kSigned) {
    throw std::invalid_argument(
        "period_errors: the signed metric is undefined for the radial "
        "collection (the planar error norm is nonnegative)");
  }
  auto row_value = [&](const TraceRecord& r) {
    const double ex = r.ref_x_m - r.ball_x_m;
    const double ey = r.ref_y_m - r.ball_y_m;
    return metric == ErrorMetric::kRmse ? ex * ex + ey * ey
                                        : std::hypot(ex, ey);
  };
  return period_windows(trace, period_s, row_value,
                        metric == ErrorMetric::kRmse);
}

std::vector<ErrorSampleSet> period_errors(const std::vector<TraceRecord>& trace,
                                          double period_s, Pooling pooling,
                                          ErrorMetric metric) {
  if (pooling == Pooling::kRadial) {
    ErrorSampleSet radial;
    radial.collection = "radial";
    radial.samples = period_errors_radial(trace, period_s, metric);
    std::vector<ErrorSampleSet> out;
    out.push_back(std::move(radial));
    return out;
  }

  std::vector<double> x = period_errors_axis(trace, period_s, Axis::kX, metric);
  std::vector<double> y = period_errors_axis(trace, period_s, Axis::kY, metric);

  std::vector<ErrorSampleSet> out;
  if (pooling == Pooling::kPooled) {
    ErrorSampleSet pooled;
    pooled.collection = "pooled";
    pooled.samples = std::move(x);
    pooled.samples.insert(pooled.samples.end(), y.begin(), y.end());
    out.push_back(std::move(pooled));
  } else {
    ErrorSampleSet sx;
    sx.collection = "x";
    sx.samples = std::move(x);
    ErrorSampleSet sy;
    sy.collection = "y";
    sy.samples = std::move(y);
    out.push_back(std::move(sx));
    out.push_back(std::move(sy));
  }
  return out;
}

namespace {

void require_samples(const std::vector<double>& s, const char* which) {
  if (s.empty()) {
    throw std::invalid_argument(std::string("ks_two_sample: sample ") + which +
                                " is empty");
  }
  for (double v : s) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string("ks_two_sample: sample ") +
                                  which + " contains a non-finite value");
    }
  }
}

}  // namespace

double kolmogorov_asymptotic_sf(double lambda) {
  if (!(lambda > 0.0)) return 1.0;
  double sum = 0.0;
  // Alternating series with strictly decreasing terms; truncation error is
  // below the first omitted term.
  for (int k = 1; k <= 100000; ++k) {
    const double term =
        std::exp(-2.0 * static_cast<double>(k) * k * lambda * lambda);
    if (term < 1e-12) break;
    sum += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_asymptotic_pvalue(double d_stat, std::size_t n, std::size_t m) {
  if (n == 0 || m == 0) {
    throw std::invalid_argument("ks_asymptotic_pvalue: empty sample");
  }
  const double ne = static_cast<double>(n) * static_cast<double>(m) /
                    (static_cast<double>(n) + static_cast<double>(m));
  const double root = std::sqrt(ne);
  const double lambda = (root + 0.12 + 0.11 / root) * d_stat;
  return kolmogorov_asymptotic_sf(lambda);
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b,
                       double alpha) {
  require_samples(a, "a");
  require_samples(b, "b");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("ks_two_sample: alpha must be in (0, 1)");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  const std::size_t n = a.size();
  const std::size_t m = b.size();
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  // Merge over distinct pooled values; the ECDF difference is evaluated only
  // after every copy of the current value is consumed from both samples,
  // which is where the step functions actually sit.
  while (i < n || j < m) {
    const double v = (i < n && (j >= m || a[i] <= b[j])) ? a[i] : b[j];
    while (i < n && a[i] == v) ++i;
    while (j < m && b[j] == v) ++j;
    const double diff = std::fabs(static_cast<double>(i) / n -
                                  static_cast<double>(j) / m);
    if (diff > d) d = diff;
  }

  KsResult r;
  r.d_stat = d;
  r.n = n;
  r.m = m;
  // The asymptotic formula is badly biased for tiny samples (off by up to
  // 0.7 at n = m = 1), so small-sample pairs get the exact permutation
  // distribution instead. The cutoff keeps the lattice walk cheap.
  r.p_value = (n * m <= 10000) ? ks_exact_pvalue(a, b)
                               : ks_asymptotic_pvalue(d, n, m);
  r.rejected = r.p_value < alpha;
  return r;
}

double ks_exact_pvalue(std::vector<double> a, std::vector<double> b) {
  require_samples(a, "a");
  require_samples(b, "b");
  // The permutation distribution is symmetric in the two samples; orient the
  // recursion on the smaller one so swapped arguments take the identical
  // floating-point path (and the table stays small).
  if (a.size() > b.size()) a.swap(b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n * m > 10000) {
    throw std::invalid_argument(
        "ks_exact_pvalue: restricted to n*m <= 10000");
  }
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());

  // Tie groups over the pooled sample: (count in a, count in b) per distinct
  // value.
  struct Group {
    int in_a = 0;
    int in_b = 0;
  };
  std::vector<Group> groups;
  {
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n || j < m) {
      const double v = (i < n && (j >= m || a[i] <= b[j])) ? a[i] : b[j];
      Group g;
      while (i < n && a[i] == v) {
        ++g.in_a;
        ++i;
      }
      while (j < m && b[j] == v) {
        ++g.in_b;
        ++j;
      }
      groups.push_back(g);
    }
  }

  // Observed statistic as the integer numerator of |i/n - j/m| over a common
  // denominator n*m, so threshold comparisons below are exact.
  const auto ln = static_cast<long long>(n);
  const auto lm = static_cast<long long>(m);
  long long d_num = 0;
  {
    long long ca = 0;
    long long cb = 0;
    for (const Group& g : groups) {
      ca += g.in_a;
      cb += g.in_b;
      d_num = std::max(d_num, std::llabs(ca * lm - cb * ln));
    }
  }
  if (d_num == 0) return 1.0;  // every relabeling reaches D >= 0

  // Count label assignments whose running ECDF gap stays strictly below the
  // observed one at every group boundary. Paths are weighted by the number
  // of ways to pick which group members carry the 'a' label.
  auto log_choose = [](long long t, long long k) {
    return std::lgamma(static_cast<double>(t) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(t - k) + 1.0);
  };

  std::vector<double> ways(n + 1, 0.0);
  ways[0] = 1.0;
  long long consumed = 0;
  for (const Group& g : groups) {
    const int size = g.in_a + g.in_b;
    std::vector<double> next(n + 1, 0.0);
    for (int pre = 0; pre <= static_cast<int>(n); ++pre) {
      if (ways[pre] == 0.0) continue;
      const int take_max =
          std::min(size, static_cast<int>(n) - pre);
      for (int take = 0; take <= take_max; ++take) {
        next[pre + take] +=
            ways[pre] * std::exp(log_choose(size, take));
      }
    }
    consumed += size;
    for (int ca = 0; ca <= static_cast<int>(n); ++ca) {
      if (next[ca] == 0.0) continue;
      const long long cb = consumed - ca;
      if (cb < 0 || cb > lm ||
          std::llabs(ca * lm - cb * ln) >= d_num) {
        next[ca] = 0.0;
      }
    }
    ways.swap(next);
  }

  const double good = ways[n];
  const double total = std::exp(log_choose(ln + lm, ln));
  return std::clamp(1.0 - good / total, 0.0, 1.0);
}

ComparisonMatrix selfsim_matrix(const std::vector<ErrorSampleSet>& runs,
                                double alpha) {
  if (runs.size() != 4) {
    throw std::invalid_argument("selfsim_matrix expects exactly 4 runs, got " +
                                std::to_string(runs.size()));
  }
  ComparisonMatrix out;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      PairKs p;
      p.index_a = i;
      p.index_b = j;
      p.ks = ks_two_sample(runs[i].samples, runs[j].samples, alpha);
      out.rejections += p.ks.rejected ? 1 : 0;
      out.pairs.push_back(std::move(p));
    }
  }
  return out;
}

ComparisonMatrix cross_matrix(const std::vector<ErrorSampleSet>& a,
                              const std::vector<ErrorSampleSet>& b,
                              double alpha) {
  if (a.size() != 4 || b.size() != 4) {
    throw std::invalid_argument("cross_matrix expects 4 runs on each side");
  }
  ComparisonMatrix out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      PairKs p;
      p.index_a = i;
      p.index_b = j;
      p.ks = ks_two_sample(a[i].samples, b[j].samples, alpha);
      out.rejections += p.ks.rejected ? 1 : 0;
      out.pairs.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<std::pair<double, double>> ecdf_export(
    std::vector<double> samples) {
  if (samples.empty()) {
    throw std::invalid_argument("ecdf_export: empty sample");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  std::vector<std::pair<double, double>> points;
  std::size_t i = 0;
  while (i < samples.size()) {
    const double v = samples[i];
    while (i < samples.size() && samples[i] == v) ++i;
    points.emplace_back(v, static_cast<double>(i) / n);
  }
  return points;
}

std::vector<HistogramBin> histogram(const std::vector<double>& samples,
                                    int bins) {
  if (samples.empty()) {
    throw std::invalid_argument("histogram: empty sample");
  }
  if (bins < 1) {
    throw std::invalid_argument("histogram: need at least one bin");
  }
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(),
                                                  samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (lo == hi) {
    return {HistogramBin{lo, hi, samples.size()}};
  }

  const double width = (hi - lo) / bins;
  std::vector<HistogramBin> out(bins);
  for (int k = 0; k < bins; ++k) {
    out[k].lo = lo + k * width;
    out[k].hi = k + 1 == bins ? hi : lo + (k + 1) * width;
  }
  for (double v : samples) {
    int k = static_cast<int>((v - lo) / width);
    k = std::clamp(k, 0, bins - 1);
    ++out[k].count;
  }
  return out;
}

}  // namespace plateloop::analysis
