#pragma once

#include <string>
#include <vector>

#include "agectl/netsim.hpp"
#include "agectl/stats.hpp"

namespace agectl {

// One cell of the experiment matrix: a named config executed once per seed.
struct CellSpec {
  std::string name;
  ExperimentConfig config;
  bool issue3{false};  // run through the scheduled-fault wrapper
};

struct RunOutcome {
  std::uint64_t seed{0};
  bool ok{false};
  std::string error;
  std::string trace_path;
  SimAggregates agg;
};

struct CellOutcome {
  std::string name;
  std::vector<RunOutcome> runs;
  SummaryStats summary;
  std::string summary_path;
};

// Executes every (cell, seed) pair, writing one trace file per run and one
// summary per cell under out_dir/<cell>/. A failing run is recorded and the
// matrix continues.
std::vector<CellOutcome> run_matrix(const std::vector<CellSpec>& cells,
                                    const std::string& out_dir);

// Canonical cell builders for the stock experiments.
std::vector<CellSpec> make_kappa_sweep(const ExperimentConfig& base,
                                       const std::vector<double>& kappas);
std::vector<CellSpec> make_acpplus_grid(const ExperimentConfig& base,
                                        const std::vector<int>& multipliers);
std::vector<CellSpec> make_feedback_cells(const ExperimentConfig& base);

// The default kappa set; only {0.1, 0.5, 1, 2} are anchored by prior
// measurements, the rest fill out the sweep.
const std::vector<double>& default_kappa_sweep();

}  // namespace agectl
