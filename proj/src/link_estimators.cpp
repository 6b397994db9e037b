#include "agectl/link_estimators.hpp"

namespace agectl {

bool feedback_epoch_end(FeedbackState& fb, EwmaEstimator& rtt_bar, double avg_age_ns) {
  if (!fb.enabled) {
    fb.rtt_min_epoch.reset();
    return false;
  }
  if (!fb.rtt_min_epoch) return false;  // no sample this epoch: zeta unchanged
  bool violated = false;
  if (avg_age_ns > static_cast<double>(fb.peak_age_threshold)) {
    fb.zeta += 1;
    const double z = static_cast<double>(fb.zeta);
    const double pulled =
        (rtt_bar.value_ns() + z * static_cast<double>(*fb.rtt_min_epoch)) / (z + 1.0);
    rtt_bar.seed(pulled);
    violated = true;
  } else {
    fb.zeta = 0;  // zeta = 0 makes the update rule the identity
  }
  fb.rtt_min_epoch.reset();
  return violated;
}

void LinkEstimators::on_ack(const AckRecord& ack, bool duplicate) {
  if (!duplicate) {
    if (ack.rtt <= 0) throw std::invalid_argument("non-positive rtt sample");
    rtt_.update(ack.rtt);
    fb_.note_rtt(ack.rtt);
  }
  if (prev_ack_time_) {
    const Duration gap = ack.ack_recv_time - *prev_ack_time_;
    if (gap > 0) z_.update(gap);
  }
  prev_ack_time_ = ack.ack_recv_time;
}

EpochAgeSummary sender_side_age_estimate(std::span<const AckRecord> acks,
                                         Timestamp window_begin, Timestamp window_end,
                                         Timestamp initial_gen) {
  AgeTracker tracker(window_begin, initial_gen);
  for (const auto& ack : acks)
    tracker.apply(DeliveryEvent{ack.gen_time, ack.ack_recv_time, ack.seq});
  return tracker.close_window(window_end);
}

}  // namespace agectl
