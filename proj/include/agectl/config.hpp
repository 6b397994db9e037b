#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "agectl/nanotime.hpp"
#include "agectl/rate_policies.hpp"

namespace agectl {

enum class JitterKind { Constant, Exponential, Lognormal };

const char* to_string(JitterKind k);

// One-way channel: propagation (base + jitter) into a single FIFO bottleneck
// on the update path. service_time = 0 disables the bottleneck, making every
// transit independent. The reverse (ACK) path uses propagation only.
struct ChannelConfig {
  Duration base_one_way_delay{dur_ms(10)};
  JitterKind jitter{JitterKind::Exponential};
  double jitter_mean_ms{5.0};  // exponential
  double jitter_mu{0.0};       // lognormal: parameters of ln(delay in ms)
  double jitter_sigma{0.0};
  double loss_prob{0.005};
  Duration service_time{dur_ms(15)};  // receiver-side per-packet processing

  void validate() const;
};

enum class FaultMode { Off, Random, Scheduled };

const char* to_string(FaultMode m);

// Receiver buffer-coalescing pathology: while active, arriving packets are
// held and released in arrival order in one burst, once hold_count are queued
// or flush_timeout has elapsed since the oldest held packet.
struct FaultConfig {
  FaultMode mode{FaultMode::Off};
  int hold_count{5};
  Duration flush_timeout{dur_ms(500)};
  double mean_interarrival_s{60.0};  // Random mode: exponential episode gaps
  Duration duration{dur_s(5)};
  Timestamp scheduled_start{dur_s(30)};  // Scheduled mode: single episode

  void validate() const;
};

// Everything a run needs. Serialization is canonical, so a config embedded
// in an output file reproduces the run byte-for-byte.
struct ExperimentConfig {
  PolicyConfig policy;
  ChannelConfig channel;
  FaultConfig fault;
  std::uint64_t packets{10000};
  int runs{5};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};

  void validate() const;
};

// Flat `key = value` text. Lines starting with '#' and blank lines are
// ignored. Unknown keys are rejected by name.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical serialization: every key, fixed order.
std::string serialize_config(const ExperimentConfig& cfg);

// Applies a single `key = value` assignment (CLI overrides reuse this).
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

// The documented key list, in canonical order.
const std::vector<std::string>& config_keys();

}  // namespace agectl
