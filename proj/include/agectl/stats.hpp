#pragma once

#include <string>
#include <vector>

#include "agectl/trace.hpp"

namespace agectl {

// Descriptive statistics over a set of epoch rows (one run or a whole cell).
struct SummaryStats {
  std::size_t n_rows{0};
  std::size_t n_runs{0};
  double weighted_mean_age_ns{0};  // epoch-length weighted: exact time average
  double mean_age_ns{0};           // unweighted per-epoch mean
  double median_age_ns{0};
  double variance_age_ns2{0};      // population variance of per-epoch averages
  double clamp_fraction{0};
  std::uint64_t lambda_updates{0};
  std::uint64_t clamped_updates{0};
  std::uint64_t peak_age_violations{0};
  std::vector<std::pair<double, double>> age_cdf;  // (age ns, probability)
  std::vector<std::pair<double, double>> rtt_cdf;  // (rtt ns, probability)
};

inline constexpr int kCdfPoints = 1000;

SummaryStats summarize_rows(const std::vector<TraceRow>& rows, Duration peak_age_threshold);
SummaryStats summarize_files(const std::vector<std::string>& trace_paths);

// Serialization of a summary as flat `key = value` text (plus `run <id> ...`
// lines when per-run aggregates are supplied).
std::string serialize_summary(const SummaryStats& s, const std::string& cell_name);

enum class PlotKind { Cdf, Trace, Sweep };

// Plain columnar plot data (one `x y` pair per line), one file per curve.
// Returns the paths written.
std::vector<std::string> emit_plot_data(const SummaryStats& s,
                                        const std::vector<TraceRow>& rows,
                                        PlotKind kind, const std::string& out_dir,
                                        const std::string& cell_name);

// Sweep variant: one (x, weighted mean age ms) point per named cell.
std::string emit_sweep_plot(const std::vector<std::pair<double, double>>& points,
                            const std::string& out_dir, const std::string& name);

}  // namespace agectl
