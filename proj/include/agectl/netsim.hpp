#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "agectl/age_metrics.hpp"
#include "agectl/config.hpp"
#include "agectl/rate_policies.hpp"

namespace agectl {

// Event kinds, in tie-break priority order: measurement events resolve before
// control events at equal timestamps, sends last.
enum class SimEventKind : std::uint8_t {
  ChannelDeliver = 0,  // packet reaches the monitor's inbound queue
  ServiceComplete,     // monitor finished processing the queue head
  AckDeliver,          // echo reaches the source
  CoalesceFlush,       // hold-buffer timeout
  FaultToggle,
  EpochBoundary,       // init review or epoch end
  SendUpdate,
};

struct SimEvent {
  Timestamp time;
  SimEventKind kind;
  std::uint64_t order;  // global insertion counter: final deterministic tie-break
  std::uint32_t seq{0};
  std::uint64_t token{0};  // invalidates superseded flush/service/send events
  bool flag{false};        // FaultToggle: activate (true) / deactivate
};

struct PacketRecord {
  std::uint32_t seq{0};
  Timestamp send_time;  // updates are generated at send
  std::optional<Timestamp> monitor_recv;
  std::optional<Timestamp> ack_recv;
  bool fwd_lost{false};
  bool ack_lost{false};
};

struct SimAggregates {
  double weighted_mean_age_ns{0};  // epoch-length weighted: exact session average
  double mean_age_ns{0};           // unweighted over epochs
  double median_age_ns{0};
  double variance_age_ns2{0};      // population variance over epochs
  std::uint64_t lambda_updates{0};
  std::uint64_t clamped_updates{0};
  double clamp_fraction{0};
  std::uint64_t peak_age_violations{0};
  std::uint64_t sent{0};
  std::uint64_t delivered{0};
  std::uint64_t fwd_lost{0};
  std::uint64_t ack_lost{0};
  std::uint64_t acked_unique{0};
  std::uint64_t duplicate_acks{0};
  std::uint64_t inflight_at_end{0};
  std::optional<std::int64_t> time_to_recovery_epochs;
};

struct SimResult {
  ExperimentConfig config;
  std::uint64_t seed{0};
  std::vector<EpochStats> epochs;
  EpochAgeSummary monitor_summary;  // true age at the monitor, whole run
  EpochAgeSummary sender_summary;   // source-side estimate, epochs phase
  std::vector<PacketRecord> packets;
  std::vector<std::pair<Timestamp, Timestamp>> fault_episodes;
  Timestamp end_time;
  SimAggregates agg;
};

struct SimError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Runs one seeded session: init phase, then epochs, until the packet budget
// is spent and the channel drains. Bitwise deterministic in (config, seed).
SimResult run_simulation(const ExperimentConfig& config, std::uint64_t seed);

// Injects one scheduled coalescing-fault episode mid-run and fills
// agg.time_to_recovery_epochs: the number of post-fault epochs before the
// average age estimate first drops below the peak-age threshold.
SimResult issue3_scenario(const ExperimentConfig& config, std::uint64_t seed);

// Recomputes aggregate statistics from epoch rows (used after trimming or for
// consistency checks).
SimAggregates compute_aggregates(const std::vector<EpochStats>& rows,
                                 Duration peak_age_threshold);

}  // namespace agectl
