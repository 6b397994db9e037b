#include "agectl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace agectl {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

// Empirical CDF sampled at kCdfPoints quantiles of the sorted values.
std::vector<std::pair<double, double>> make_cdf(std::vector<double> values) {
  std::vector<std::pair<double, double>> cdf;
  if (values.empty()) return cdf;
  std::sort(values.begin(), values.end());
  cdf.reserve(kCdfPoints);
  const std::size_t n = values.size();
  for (int q = 1; q <= kCdfPoints; ++q) {
    const double p = static_cast<double>(q) / kCdfPoints;
    std::size_t idx = static_cast<std::size_t>(std::ceil(p * n));
    if (idx == 0) idx = 1;
    if (idx > n) idx = n;
    cdf.emplace_back(values[idx - 1], p);
  }
  return cdf;
}

void write_xy(const std::string& path, const std::vector<std::pair<double, double>>& pts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot file: " + path);
  for (const auto& [x, y] : pts) out << fmt_double(x) << ' ' << fmt_double(y) << "\n";
}

}  // namespace

SummaryStats summarize_rows(const std::vector<TraceRow>& rows, Duration peak_age_threshold) {
  SummaryStats s;
  s.n_rows = rows.size();
  if (rows.empty()) return s;

  std::set<std::uint64_t> run_ids;
  std::vector<double> ages, rtts;
  ages.reserve(rows.size());
  rtts.reserve(rows.size());
  double area = 0, span = 0, sum = 0;
  for (const auto& r : rows) {
    run_ids.insert(r.run_id);
    area += r.stats.avg_age_ns * static_cast<double>(r.stats.epoch_len);
    span += static_cast<double>(r.stats.epoch_len);
    sum += r.stats.avg_age_ns;
    ages.push_back(r.stats.avg_age_ns);
    if (r.stats.rtt_bar_ns > 0) rtts.push_back(r.stats.rtt_bar_ns);
    if (r.stats.action) {
      ++s.lambda_updates;
      if (r.stats.clamped) ++s.clamped_updates;
    }
    if (r.stats.avg_age_ns > static_cast<double>(peak_age_threshold))
      ++s.peak_age_violations;
  }
  s.n_runs = run_ids.size();
  s.weighted_mean_age_ns = span > 0 ? area / span : 0;
  s.mean_age_ns = sum / static_cast<double>(rows.size());

  std::vector<double> sorted = ages;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.median_age_ns = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  double var = 0;
  for (double a : sorted) var += (a - s.mean_age_ns) * (a - s.mean_age_ns);
  s.variance_age_ns2 = var / static_cast<double>(n);
  s.clamp_fraction =
      s.lambda_updates > 0
          ? static_cast<double>(s.clamped_updates) / static_cast<double>(s.lambda_updates)
          : 0.0;
  s.age_cdf = make_cdf(std::move(ages));
  s.rtt_cdf = make_cdf(std::move(rtts));
  return s;
}

SummaryStats summarize_files(const std::vector<std::string>& trace_paths) {
  std::vector<TraceRow> rows;
  Duration threshold = dur_ms(200);
  for (const auto& path : trace_paths) {
    TraceFile tf = load_trace_file(path);
    threshold = tf.config.policy.peak_age_threshold;
    rows.insert(rows.end(), tf.rows.begin(), tf.rows.end());
  }
  return summarize_rows(rows, threshold);
}

std::string serialize_summary(const SummaryStats& s, const std::string& cell_name) {
  std::ostringstream out;
  out << "# agectl-summary v1\n";
  out << "cell = " << cell_name << "\n";
  out << "runs = " << s.n_runs << "\n";
  out << "rows = " << s.n_rows << "\n";
  out << "weighted_mean_age_ms = " << fmt_double(s.weighted_mean_age_ns / 1e6) << "\n";
  out << "mean_age_ms = " << fmt_double(s.mean_age_ns / 1e6) << "\n";
  out << "median_age_ms = " << fmt_double(s.median_age_ns / 1e6) << "\n";
  out << "variance_age_ms2 = " << fmt_double(s.variance_age_ns2 / 1e12) << "\n";
  out << "clamp_fraction = " << fmt_double(s.clamp_fraction) << "\n";
  out << "lambda_updates = " << s.lambda_updates << "\n";
  out << "clamped_updates = " << s.clamped_updates << "\n";
  out << "peak_age_violations = " << s.peak_age_violations << "\n";
  return out.str();
}

std::vector<std::string> emit_plot_data(const SummaryStats& s,
                                        const std::vector<TraceRow>& rows,
                                        PlotKind kind, const std::string& out_dir,
                                        const std::string& cell_name) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> written;
  switch (kind) {
    case PlotKind::Cdf: {
      std::vector<std::pair<double, double>> age_ms, rtt_ms;
      for (const auto& [x, y] : s.age_cdf) age_ms.emplace_back(x / 1e6, y);
      for (const auto& [x, y] : s.rtt_cdf) rtt_ms.emplace_back(x / 1e6, y);
      const std::string age_path = (fs::path(out_dir) / (cell_name + "_age_cdf.dat")).string();
      const std::string rtt_path = (fs::path(out_dir) / (cell_name + "_rtt_cdf.dat")).string();
      write_xy(age_path, age_ms);
      write_xy(rtt_path, rtt_ms);
      written = {age_path, rtt_path};
      break;
    }
    case PlotKind::Trace: {
      std::vector<std::pair<double, double>> pts;
      pts.reserve(rows.size());
      for (const auto& r : rows)
        pts.emplace_back(to_s(r.stats.t_end - Timestamp{}), r.stats.avg_age_ns / 1e6);
      const std::string path = (fs::path(out_dir) / (cell_name + "_trace.dat")).string();
      write_xy(path, pts);
      written = {path};
      break;
    }
    case PlotKind::Sweep:
      throw std::invalid_argument("sweep plots are emitted via emit_sweep_plot");
  }
  return written;
}

std::string emit_sweep_plot(const std::vector<std::pair<double, double>>& points,
                            const std::string& out_dir, const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / (name + "_sweep.dat")).string();
  write_xy(path, points);
  return path;
}

}  // namespace agectl
