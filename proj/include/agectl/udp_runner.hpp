#pragma once

#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "agectl/rate_policies.hpp"

namespace agectl {

// Stateless echo server: every valid WirePacket is reflected to its source
// address unchanged; anything else is counted and dropped.
class EchoServer {
 public:
  // addr is "HOST:PORT"; port 0 binds an ephemeral port.
  explicit EchoServer(const std::string& addr);
  ~EchoServer();
  EchoServer(const EchoServer&) = delete;
  EchoServer& operator=(const EchoServer&) = delete;

  std::uint16_t port() const { return port_; }

  // Serves until *stop becomes true (checked a few times per second).
  void run(const std::atomic<bool>* stop);

  std::uint64_t received() const { return received_; }
  std::uint64_t echoed() const { return echoed_; }
  std::uint64_t dropped_malformed() const { return dropped_; }

 private:
  int fd_{-1};
  std::uint16_t port_{0};
  std::atomic<std::uint64_t> received_{0};
  std::atomic<std::uint64_t> echoed_{0};
  std::atomic<std::uint64_t> dropped_{0};
};

struct SenderOptions {
  std::string peer;  // "HOST:PORT"
  PolicyConfig policy;
  std::uint64_t packets{1000};
  Duration drain_wait{dur_ms(500)};  // extra listening time after the last send
};

struct SenderResult {
  std::vector<EpochStats> epochs;
  EpochAgeSummary sender_summary;
  std::uint64_t sent{0};
  std::uint64_t acked_unique{0};
  std::uint64_t duplicate_acks{0};
  std::uint64_t unacked{0};  // lost or still in flight when the session closed
  std::uint64_t rtt_samples{0};
  Duration min_rtt{0};
  Duration session_len{0};
};

// Drives the policy engine over real datagrams against an echo peer. All
// timestamps come from the sender's monotonic clock, so only RTT and the
// source-side age estimate are measured; no cross-host clock sync is needed.
SenderResult run_sender(const SenderOptions& opts);

}  // namespace agectl
