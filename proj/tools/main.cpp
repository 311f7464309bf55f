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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "plateloop/analysis.hpp"
#include "plateloop/runner.hpp"
#include "plateloop/trace.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using namespace plateloop;
using runner::ConfigError;
using runner::MissingDataError;

namespace {

// Exit codes shared by every command.
constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDiverged = 3;
constexpr int kMissingData = 4;

struct CommonOpts {
  std::string pooling = "radial";
  std::string metric = "abs";
  double alpha = 0.001;
  bool force = false;
};

void require_fresh(const fs::path& path, bool force) {
  if (fs::exists(path) && !force) {
    throw ConfigError("output exists: " + path.string() +
                      " (use --force to overwrite)");
  }
}

std::ofstream open_out(const fs::path& path, bool force) {
  require_fresh(path, force);
  std::ofstream os(path);
  if (!os) {
    throw ConfigError("cannot open for writing: " + path.string());
  }
  return os;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// run

struct RunOpts {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> runs;
  std::optional<double> duration;
  int jobs = 1;
  bool force = false;
};

int cmd_run(const RunOpts& o) {
  runner::ScenarioConfig cfg = o.config_path.empty()
                                   ? runner::default_config()
                                   : runner::config_from_json_file(o.config_path);
  if (o.seed) cfg.master_seed = *o.seed;
  if (o.runs) cfg.runs = *o.runs;
  if (o.duration) cfg.duration_s = *o.duration;
  cfg.validate();  // before touching the filesystem

  const runner::ScenarioResult result =
      runner::run_scenario(cfg, o.out_dir, o.force, o.jobs);
  for (const fs::path& dir : result.run_dirs) {
    std::cout << "wrote " << dir.string() << "\n";
  }
  if (result.diverged) {
    // The diagnostic already names the run and the divergence time.
    std::cerr << result.diagnostic << "\n";
    return kDiverged;
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeOpts {
  std::string scenario_dir;
  std::string out_path;
  CommonOpts common;
};

int cmd_analyze(const AnalyzeOpts& o) {
  const auto pooling = analysis::parse_pooling(o.common.pooling);
  const auto metric = analysis::parse_metric(o.common.metric);
  const auto collections =
      runner::load_scenario_samples(o.scenario_dir, pooling, metric);

  std::ostringstream csv;
  csv << "scenario_id,run_index,collection,sample_index,value\n";
  for (const auto& coll : collections) {
    for (const auto& run : coll.runs) {
      for (std::size_t i = 0; i < run.samples.size(); ++i) {
        csv << run.scenario_id << "," << run.run_index << ","
            << run.collection << "," << i << ","
            << format_value(run.samples[i]) << "\n";
      }
    }
  }
  if (o.out_path.empty()) {
    std::cout << csv.str();
  } else {
    open_out(o.out_path, o.common.force) << csv.str();
    std::cout << "wrote " << o.out_path << "\n";
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// selfsim / compare / report

std::string report_csv_header() {
  return "scenario_a,run_a,scenario_b,run_b,collection,n,m,d_stat,p_value,"
         "rejected";
}

void append_pairs(std::ostringstream& csv, const std::string& scenario_a,
                  const std::string& scenario_b, const std::string& collection,
                  const analysis::ComparisonMatrix& matrix) {
  for (const auto& pair : matrix.pairs) {
    csv << scenario_a << "," << pair.index_a << "," << scenario_b << ","
        << pair.index_b << "," << collection << "," << pair.ks.n << ","
        << pair.ks.m << "," << format_value(pair.ks.d_stat) << ","
        << format_value(pair.ks.p_value) << ","
        << (pair.ks.rejected ? 1 : 0) << "\n";
  }
}

void print_pair_table(const std::string& scenario_a,
                      const std::string& scenario_b,
                      const std::string& collection,
                      const analysis::ComparisonMatrix& matrix) {
  std::printf("collection %s:\n", collection.c_str());
  std::printf("  %-28s %8s %10s %9s\n", "pair", "D", "p", "rejected");
  for (const auto& pair : matrix.pairs) {
    const std::string name = scenario_a + "/run_" +
                             std::to_string(pair.index_a) + " vs " +
                             scenario_b + "/run_" +
                             std::to_string(pair.index_b);
    std::printf("  %-28s %8.4f %10.3g %9s\n", name.c_str(), pair.ks.d_stat,
                pair.ks.p_value, pair.ks.rejected ? "yes" : "no");
  }
  std::printf("  %d of %zu rejected\n", matrix.rejections,
              matrix.pairs.size());
}

struct PairCmdOpts {
  std::string dir_a;
  std::string dir_b;  // empty for selfsim
  std::string out_path;
  CommonOpts common;
};

int cmd_selfsim(const PairCmdOpts& o) {
  const auto pooling = analysis::parse_pooling(o.common.pooling);
  const auto metric = analysis::parse_metric(o.common.metric);
  const auto collections =
      runner::load_scenario_samples(o.dir_a, pooling, metric);

  std::ostringstream csv;
  csv << report_csv_header() << "\n";
  int total_rejections = 0;
  std::size_t total_pairs = 0;
  for (const auto& coll : collections) {
    const auto matrix = analysis::selfsim_matrix(coll.runs, o.common.alpha);
    append_pairs(csv, coll.scenario_id, coll.scenario_id, coll.collection,
                 matrix);
    print_pair_table(coll.scenario_id, coll.scenario_id, coll.collection,
                     matrix);
    total_rejections += matrix.rejections;
    total_pairs += matrix.pairs.size();
  }
  std::printf("selfsim %s: %d of %zu pairs rejected at alpha=%g\n",
              collections.front().scenario_id.c_str(), total_rejections,
              total_pairs, o.common.alpha);
  if (!o.out_path.empty()) {
    open_out(o.out_path, o.common.force) << csv.str();
    std::printf("wrote %s\n", o.out_path.c_str());
  }
  return kOk;
}

int cmd_compare(const PairCmdOpts& o) {
  const auto pooling = analysis::parse_pooling(o.common.pooling);
  const auto metric = analysis::parse_metric(o.common.metric);
  const auto a = runner::load_scenario_samples(o.dir_a, pooling, metric);
  const auto b = runner::load_scenario_samples(o.dir_b, pooling, metric);

  // Different sampling protocols still compare, but the operator should know.
  const auto cfg_a = runner::load_run_config(fs::path(o.dir_a) / "run_0");
  const auto cfg_b = runner::load_run_config(fs::path(o.dir_b) / "run_0");
  if (cfg_a.period_s != cfg_b.period_s ||
      cfg_a.duration_s != cfg_b.duration_s) {
    std::cerr << "warning: scenarios use different period/duration ("
              << cfg_a.period_s << "/" << cfg_a.duration_s << " vs "
              << cfg_b.period_s << "/" << cfg_b.duration_s << ")\n";
  }

  std::ostringstream csv;
  csv << report_csv_header() << "\n";
  int total_rejections = 0;
  std::size_t total_pairs = 0;
  for (const auto& coll_a : a) {
    for (const auto& coll_b : b) {
      if (coll_a.collection != coll_b.collection) continue;
      const auto matrix =
          analysis::cross_matrix(coll_a.runs, coll_b.runs, o.common.alpha);
      append_pairs(csv, coll_a.scenario_id, coll_b.scenario_id,
                   coll_a.collection, matrix);
      print_pair_table(coll_a.scenario_id, coll_b.scenario_id,
                       coll_a.collection, matrix);
      total_rejections += matrix.rejections;
      total_pairs += matrix.pairs.size();
    }
  }
  std::printf("compare %s vs %s: %d of %zu pairs rejected at alpha=%g\n",
              a.front().scenario_id.c_str(), b.front().scenario_id.c_str(),
              total_rejections, total_pairs, o.common.alpha);
  if (!o.out_path.empty()) {
    open_out(o.out_path, o.common.force) << csv.str();
    std::printf("wrote %s\n", o.out_path.c_str());
  }
  return kOk;
}

int cmd_report(const PairCmdOpts& o) {
  const auto pooling = analysis::parse_pooling(o.common.pooling);
  const auto metric = analysis::parse_metric(o.common.metric);
  const auto collections =
      runner::load_scenario_samples(o.dir_a, pooling, metric);

  std::printf("scenario %s (%s error, %s pooling)\n",
              collections.front().scenario_id.c_str(), o.common.metric.c_str(),
              o.common.pooling.c_str());
  for (const auto& coll : collections) {
    for (const auto& run : coll.runs) {
      const auto& s = run.samples;
      const double mean =
          std::accumulate(s.begin(), s.end(), 0.0) / s.size();
      const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
      std::printf(
          "  run %d [%s]: %zu samples, mean %.6g, min %.6g, max %.6g\n",
          run.run_index, run.collection.c_str(), s.size(), mean, *mn, *mx);
    }
  }
  for (const auto& coll : collections) {
    const auto matrix = analysis::selfsim_matrix(coll.runs, o.common.alpha);
    print_pair_table(coll.scenario_id, coll.scenario_id, coll.collection,
                     matrix);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// plot

struct PlotOpts {
  std::string run_dir;
  std::string run_dir_b;
  std::string out_dir;
  int bins = 30;
  int period_index = -1;  // -1 selects the last complete period
  CommonOpts common;
};

std::vector<TraceRecord> load_trace(const fs::path& run_dir) {
  const fs::path csv = run_dir / "controller.csv";
  if (!fs::exists(csv)) {
    throw MissingDataError("missing trace: " + csv.string());
  }
  return read_controller_csv(csv);
}

std::vector<double> pooled_samples(const fs::path& run_dir,
                                   analysis::ErrorMetric metric) {
  const auto sets = runner::load_run_samples(run_dir, analysis::Pooling::kPooled,
                                             metric);
  return sets.front().samples;
}

void plot_period(const PlotOpts& o, const std::vector<TraceRecord>& trace,
                 double period_s) {
  // Periods are counted on the global clock; the run covers whole periods.
  const double t_first = trace.front().time_s;
  const double t_last = trace.back().time_s;
  const long first_period = static_cast<long>(std::floor(t_first / period_s));
  const long last_period = static_cast<long>(std::floor(t_last / period_s));
  const long k = (o.period_index >= 0) ? o.period_index : last_period;
  if (k < first_period || k > last_period) {
    throw ConfigError("period index " + std::to_string(k) +
                      " outside the trace (periods " +
                      std::to_string(first_period) + ".." +
                      std::to_string(last_period) + ")");
  }
  const double lo = static_cast<double>(k) * period_s;
  const double hi = lo + period_s;

  std::ofstream csv = open_out(fs::path(o.out_dir) / "period_plot.csv",
                               o.common.force);
  csv << "time_s,ref_x_m,ref_y_m,ball_x_m,ball_y_m\n";
  svg::Series ref_x{"ref x", "", false, {}};
  svg::Series ball_x{"ball x", "", false, {}};
  svg::Series ref_y{"ref y", "", false, {}};
  svg::Series ball_y{"ball y", "", false, {}};
  for (const TraceRecord& r : trace) {
    if (r.time_s < lo || r.time_s >= hi) continue;
    csv << format_value(r.time_s) << "," << format_value(r.ref_x_m) << ","
        << format_value(r.ref_y_m) << "," << format_value(r.ball_x_m) << ","
        << format_value(r.ball_y_m) << "\n";
    ref_x.points.emplace_back(r.time_s, r.ref_x_m);
    ball_x.points.emplace_back(r.time_s, r.ball_x_m);
    ref_y.points.emplace_back(r.time_s, r.ref_y_m);
    ball_y.points.emplace_back(r.time_s, r.ball_y_m);
  }
  svg::ChartSpec spec;
  spec.title = "One period of ball position, period " + std::to_string(k);
  spec.x_label = "time [s]";
  spec.y_label = "position [m]";
  open_out(fs::path(o.out_dir) / "period_plot.svg", o.common.force)
      << svg::render_chart(spec, {ref_x, ball_x, ref_y, ball_y});
}

void plot_histogram(const PlotOpts& o, const std::vector<double>& samples) {
  const auto bins = analysis::histogram(samples, o.bins);
  std::ofstream csv = open_out(fs::path(o.out_dir) / "error_hist.csv",
                               o.common.force);
  csv << "bin_lo,bin_hi,count\n";
  for (const auto& bin : bins) {
    csv << format_value(bin.lo) << "," << format_value(bin.hi) << ","
        << bin.count << "\n";
  }
}

void plot_ecdf(const PlotOpts& o, const std::string& label_a,
               std::vector<double> samples_a, const std::string& label_b,
               std::vector<double> samples_b) {
  const auto ecdf_a = analysis::ecdf_export(std::move(samples_a));
  const auto ecdf_b = analysis::ecdf_export(std::move(samples_b));
  std::ofstream csv =
      open_out(fs::path(o.out_dir) / "ecdf.csv", o.common.force);
  csv << "source,value,fraction\n";
  for (const auto& [v, f] : ecdf_a) {
    csv << label_a << "," << format_value(v) << "," << format_value(f) << "\n";
  }
  for (const auto& [v, f] : ecdf_b) {
    csv << label_b << "," << format_value(v) << "," << format_value(f) << "\n";
  }
  svg::Series sa{label_a, "", true, {}};
  svg::Series sb{label_b, "", true, {}};
  for (const auto& [v, f] : ecdf_a) sa.points.emplace_back(v, f);
  for (const auto& [v, f] : ecdf_b) sb.points.emplace_back(v, f);
  svg::ChartSpec spec;
  spec.title = "Per-period error ECDF";
  spec.x_label = "error [m]";
  spec.y_label = "cumulative fraction";
  open_out(fs::path(o.out_dir) / "ecdf.svg", o.common.force)
      << svg::render_chart(spec, {sa, sb});
}

int cmd_plot(const PlotOpts& o) {
  const auto metric = analysis::parse_metric(o.common.metric);
  fs::create_directories(o.out_dir);

  const auto trace = load_trace(o.run_dir);
  if (trace.empty()) {
    throw MissingDataError("empty trace in " + o.run_dir);
  }
  const auto cfg = runner::load_run_config(o.run_dir);
  plot_period(o, trace, cfg.period_s);
  plot_histogram(o, pooled_samples(o.run_dir, metric));

  if (!o.run_dir_b.empty()) {
    auto label = [](const fs::path& p) {
      const fs::path parent = p.parent_path();
      return parent.filename().string() + "/" + p.filename().string();
    };
    plot_ecdf(o, label(fs::absolute(o.run_dir).lexically_normal()),
              pooled_samples(o.run_dir, metric),
              label(fs::absolute(o.run_dir_b).lexically_normal()),
              pooled_samples(o.run_dir_b, metric));
  }
  std::cout << "wrote plot files to " << o.out_dir << "\n";
  return kOk;
}

void add_common(CLI::App* cmd, CommonOpts* common, bool with_alpha) {
  cmd->add_option("--pooling", common->pooling,
                  "sample pooling: radial | pooled | per-axis (radial takes "
                  "one planar-norm sample per period, so the axes' shared "
                  "timing noise is not double-counted)")
      ->check(CLI::IsMember({"radial", "pooled", "per-axis"}));
  cmd->add_option("--metric", common->metric,
                  "per-period error metric: abs | signed | rmse")
      ->check(CLI::IsMember({"abs", "signed", "rmse"}));
  if (with_alpha) {
    cmd->add_option("--alpha", common->alpha, "significance level");
  }
  cmd->add_flag("--force", common->force, "overwrite existing outputs");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Deterministic ball-on-plate control loop over an emulated network: "
      "scenario runner and trace statistics"};
  app.require_subcommand(1);

  RunOpts run_opts;
  CLI::App* run = app.add_subcommand(
      "run", "execute a scenario and persist run directories");
  run->add_option("--config", run_opts.config_path,
                  "scenario config JSON (defaults apply when omitted)");
  run->add_option("--out", run_opts.out_dir, "output directory")->required();
  run->add_option("--seed", run_opts.seed, "override master_seed");
  run->add_option("--runs", run_opts.runs, "override run count");
  run->add_option("--duration", run_opts.duration,
                  "override per-run duration [s]");
  run->add_option("--jobs", run_opts.jobs,
                  "parallel runs (independent runs only)");
  run->add_flag("--force", run_opts.force, "overwrite an existing scenario");

  AnalyzeOpts analyze_opts;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "emit per-period error samples of a scenario as CSV");
  analyze->add_option("scenario_dir", analyze_opts.scenario_dir,
                      "scenario directory (contains run_<k>/)")
      ->required();
  analyze->add_option("--out", analyze_opts.out_path,
                      "output CSV (stdout when omitted)");
  add_common(analyze, &analyze_opts.common, false);

  PairCmdOpts selfsim_opts;
  CLI::App* selfsim = app.add_subcommand(
      "selfsim", "KS tests over all run pairs within one scenario");
  selfsim->add_option("scenario_dir", selfsim_opts.dir_a, "scenario directory")
      ->required();
  selfsim->add_option("--out", selfsim_opts.out_path, "report CSV path");
  add_common(selfsim, &selfsim_opts.common, true);

  PairCmdOpts compare_opts;
  CLI::App* compare = app.add_subcommand(
      "compare", "KS tests over all cross pairs between two scenarios");
  compare->add_option("dir_a", compare_opts.dir_a, "first scenario directory")
      ->required();
  compare->add_option("dir_b", compare_opts.dir_b, "second scenario directory")
      ->required();
  compare->add_option("--out", compare_opts.out_path, "report CSV path");
  add_common(compare, &compare_opts.common, true);

  PairCmdOpts report_opts;
  CLI::App* report = app.add_subcommand(
      "report", "human-readable run summary and self-similarity table");
  report->add_option("scenario_dir", report_opts.dir_a, "scenario directory")
      ->required();
  add_common(report, &report_opts.common, true);

  PlotOpts plot_opts;
  CLI::App* plot = app.add_subcommand(
      "plot",
      "emit plot-ready CSV/SVG: one-period trajectory, error histogram, and "
      "an ECDF overlay when a second run is given");
  plot->add_option("run_dir", plot_opts.run_dir, "run directory")->required();
  plot->add_option("run_dir_b", plot_opts.run_dir_b,
                   "second run directory for the ECDF overlay");
  plot->add_option("--out", plot_opts.out_dir, "output directory")->required();
  plot->add_option("--bins", plot_opts.bins, "histogram bin count");
  plot->add_option("--period-index", plot_opts.period_index,
                   "global period index to plot (default: last)");
  add_common(plot, &plot_opts.common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (analyze->parsed()) return cmd_analyze(analyze_opts);
    if (selfsim->parsed()) return cmd_selfsim(selfsim_opts);
    if (compare->parsed()) return cmd_compare(compare_opts);
    if (report->parsed()) return cmd_report(report_opts);
    if (plot->parsed()) return cmd_plot(plot_opts);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const MissingDataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kMissingData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kConfigError;
}
