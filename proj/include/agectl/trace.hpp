#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agectl/config.hpp"
#include "agectl/rate_policies.hpp"

namespace agectl {

// One CSV row per epoch. run_id doubles as the seed of the run.
struct TraceRow {
  std::uint64_t run_id{0};
  PolicyKind policy{PolicyKind::Acp};
  EpochStats stats;
};

struct TraceFile {
  ExperimentConfig config;
  std::uint64_t seed{0};
  std::uint64_t run_id{0};
  std::vector<TraceRow> rows;
};

// Header block (`# key = value` config echo, seed, run id), then a column-name
// row, then the epochs. Byte-deterministic for identical inputs.
std::string serialize_trace(const ExperimentConfig& cfg, std::uint64_t seed,
                            const std::vector<EpochStats>& rows);
void write_trace_file(const std::string& path, const ExperimentConfig& cfg,
                      std::uint64_t seed, const std::vector<EpochStats>& rows);

// Parses a trace produced by serialize_trace. Unknown or missing columns are
// reported by name.
TraceFile parse_trace(const std::string& text);
TraceFile load_trace_file(const std::string& path);

}  // namespace agectl
