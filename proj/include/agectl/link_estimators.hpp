#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "agectl/age_metrics.hpp"
#include "agectl/nanotime.hpp"

namespace agectl {

// One acknowledged update as seen at the source.
struct AckRecord {
  std::uint32_t seq{0};
  Timestamp gen_time;       // generation stamp of the acknowledged update
  Timestamp ack_recv_time;  // arrival of the ACK at the source
  Duration rtt{0};          // ack_recv_time - send time of seq
};

// Exponentially weighted moving average over positive duration samples.
class EwmaEstimator {
 public:
  explicit EwmaEstimator(double alpha = 0.125) : alpha_(alpha) {
    if (!(alpha > 0.0) || alpha > 1.0)
      throw std::invalid_argument("ewma alpha must be in (0,1]");
  }

  void update(Duration sample) {
    if (sample <= 0) throw std::invalid_argument("ewma sample must be positive");
    if (!init_) {
      value_ns_ = static_cast<double>(sample);
      init_ = true;
    } else {
      value_ns_ = (1.0 - alpha_) * value_ns_ + alpha_ * static_cast<double>(sample);
    }
  }

  // Overwrites the estimate (initialization-phase seeding, feedback pull).
  void seed(double value_ns) {
    if (!(value_ns > 0.0)) throw std::invalid_argument("ewma seed must be positive");
    value_ns_ = value_ns;
    init_ = true;
  }

  bool initialized() const { return init_; }
  double value_ns() const {
    if (!init_) throw std::logic_error("ewma read before first sample");
    return value_ns_;
  }
  double alpha() const { return alpha_; }

 private:
  double value_ns_{0};
  double alpha_;
  bool init_{false};
};

// Peak-age violation feedback. Counts consecutive epochs whose average age
// exceeded the threshold and, on each violation, pulls the smoothed RTT
// toward the smallest RTT observed during the epoch:
//
//   rtt_bar <- (rtt_bar + zeta * rtt_min_epoch) / (zeta + 1)
//
// Valid only for one-hop single-flow setups; with more flows a violation
// cannot be attributed to the receiver-side buffering fault.
struct FeedbackState {
  bool enabled{false};
  Duration peak_age_threshold{dur_ms(200)};
  std::uint32_t zeta{0};
  std::optional<Duration> rtt_min_epoch;

  void note_rtt(Duration rtt) {
    if (!rtt_min_epoch || rtt < *rtt_min_epoch) rtt_min_epoch = rtt;
  }
};

// Applies the end-of-epoch feedback rule. A no-op (zeta untouched) when the
// epoch produced no RTT sample. Returns true when a violation was counted.
bool feedback_epoch_end(FeedbackState& fb, EwmaEstimator& rtt_bar, double avg_age_ns);

// RTT and inter-ACK estimators plus feedback state for one session.
class LinkEstimators {
 public:
  LinkEstimators(double alpha, FeedbackState fb)
      : rtt_(alpha), z_(alpha), fb_(fb) {}

  // Feeds one ACK. Duplicate ACKs contribute no RTT sample (the pairing with
  // a send instant is ambiguous) but still count as an ACK arrival for the
  // inter-ACK estimate. The first ACK of a session produces no Z sample.
  void on_ack(const AckRecord& ack, bool duplicate);

  // End-of-epoch feedback step; resets the per-epoch RTT minimum.
  bool epoch_end(double avg_age_ns) { return feedback_epoch_end(fb_, rtt_, avg_age_ns); }

  void seed_rtt(double value_ns) { rtt_.seed(value_ns); }
  void seed_z(double value_ns) { z_.seed(value_ns); }

  bool rtt_initialized() const { return rtt_.initialized(); }
  double rtt_bar_ns() const { return rtt_.value_ns(); }
  // Falls back to the RTT estimate until the first inter-ACK gap is seen.
  double z_bar_ns() const { return z_.initialized() ? z_.value_ns() : rtt_.value_ns(); }

  const FeedbackState& feedback() const { return fb_; }
  FeedbackState& feedback() { return fb_; }
  std::uint32_t zeta() const { return fb_.zeta; }

 private:
  EwmaEstimator rtt_;
  EwmaEstimator z_;
  FeedbackState fb_;
  std::optional<Timestamp> prev_ack_time_;
};

// Replays ACK arrivals as deliveries of the acknowledged updates and returns
// the age summary of the resulting source-side estimate over the window.
EpochAgeSummary sender_side_age_estimate(std::span<const AckRecord> acks,
                                         Timestamp window_begin, Timestamp window_end,
                                         Timestamp initial_gen = {});

}  // namespace agectl
