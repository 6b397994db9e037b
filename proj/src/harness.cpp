#include "agectl/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "agectl/trace.hpp"

namespace agectl {

namespace fs = std::filesystem;

namespace {

std::string kappa_label(double kappa) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", kappa);
  std::string s = buf;
  for (auto& c : s)
    if (c == '.') c = 'p';
  return s;
}

}  // namespace

std::vector<CellOutcome> run_matrix(const std::vector<CellSpec>& cells,
                                    const std::string& out_dir) {
  std::vector<CellOutcome> outcomes;
  for (const auto& cell : cells) {
    CellOutcome outcome;
    outcome.name = cell.name;
    const fs::path cell_dir = fs::path(out_dir) / cell.name;
    fs::create_directories(cell_dir);

    std::vector<TraceRow> all_rows;
    for (const auto seed : cell.config.seeds) {
      RunOutcome run;
      run.seed = seed;
      try {
        const SimResult res = cell.issue3 ? issue3_scenario(cell.config, seed)
                                          : run_simulation(cell.config, seed);
        const fs::path trace_path = cell_dir / ("trace_seed" + std::to_string(seed) + ".csv");
        write_trace_file(trace_path.string(), res.config, seed, res.epochs);
        run.trace_path = trace_path.string();
        run.agg = res.agg;
        run.ok = true;
        for (const auto& row : res.epochs)
          all_rows.push_back(TraceRow{seed, res.config.policy.kind, row});
      } catch (const std::exception& e) {
        run.ok = false;
        run.error = e.what();
      }
      outcome.runs.push_back(std::move(run));
    }

    outcome.summary = summarize_rows(all_rows, cell.config.policy.peak_age_threshold);
    const fs::path summary_path = cell_dir / "summary.txt";
    std::ofstream out(summary_path, std::ios::binary);
    out << serialize_summary(outcome.summary, cell.name);
    for (const auto& run : outcome.runs) {
      if (run.ok)
        out << "run " << run.seed << " weighted_mean_age_ms = "
            << run.agg.weighted_mean_age_ns / 1e6 << "\n";
      else
        out << "run " << run.seed << " error = " << run.error << "\n";
    }
    outcome.summary_path = summary_path.string();
    outcomes.push_back(std::move(outcome));
  }
  return outcomes;
}

const std::vector<double>& default_kappa_sweep() {
  static const std::vector<double> kappas = {0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0};
  return kappas;
}

std::vector<CellSpec> make_kappa_sweep(const ExperimentConfig& base,
                                       const std::vector<double>& kappas) {
  std::vector<CellSpec> cells;
  for (const double kappa : kappas) {
    CellSpec cell;
    cell.config = base;
    cell.config.policy.kind = PolicyKind::Acp;
    cell.config.policy.kappa = kappa;
    cell.name = "acp_kappa" + kappa_label(kappa);
    cells.push_back(std::move(cell));
  }
  return cells;
}

std::vector<CellSpec> make_acpplus_grid(const ExperimentConfig& base,
                                        const std::vector<int>& multipliers) {
  std::vector<CellSpec> cells;
  for (const int m : multipliers) {
    for (const PolicyKind kind : {PolicyKind::AcpPlusOriginal, PolicyKind::AcpPlusModified}) {
      CellSpec cell;
      cell.config = base;
      cell.config.policy.kind = kind;
      cell.config.policy.epoch_multiplier = m;
      cell.name =
          std::string(kind == PolicyKind::AcpPlusOriginal ? "acpplus_orig" : "acpplus_mod") +
          "_T" + std::to_string(m);
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::vector<CellSpec> make_feedback_cells(const ExperimentConfig& base) {
  std::vector<CellSpec> cells;
  for (const bool fb : {false, true}) {
    CellSpec cell;
    cell.config = base;
    cell.config.policy.feedback_enabled = fb;
    cell.issue3 = true;
    cell.name = fb ? "feedback_on" : "feedback_off";
    cells.push_back(std::move(cell));
  }
  return cells;
}

}  // namespace agectl
