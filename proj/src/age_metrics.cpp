#include "agectl/age_metrics.hpp"

namespace agectl {

void AgeTracker::advance_to(Timestamp t) {
  const Duration dt = t - last_event_;
  const Duration a1 = last_event_ - freshest_gen_;
  const Duration a2 = a1 + dt;
  area_x2_ += static_cast<AreaNs2>(a1 + a2) * dt;
  if (a2 > peak_) peak_ = a2;
  last_event_ = t;
}

void AgeTracker::apply(const DeliveryEvent& ev) {
  if (ev.recv_time < last_event_)
    throw std::invalid_argument("delivery out of order: recv_time before last event");
  if (ev.recv_time < ev.gen_time)
    throw std::invalid_argument("delivery received before it was generated");
  advance_to(ev.recv_time);
  ++deliveries_;
  if (ev.gen_time > freshest_gen_) freshest_gen_ = ev.gen_time;
}

EpochAgeSummary AgeTracker::close_window(Timestamp t_final) {
  if (t_final < last_event_)
    throw std::invalid_argument("close_window before last event");
  if (t_final <= window_start_)
    throw std::invalid_argument("zero-length window");
  advance_to(t_final);

  EpochAgeSummary out;
  out.window_begin = window_start_;
  out.window_end = t_final;
  out.area_x2 = area_x2_;
  out.peak_age = peak_;
  out.n_deliveries = deliveries_;
  const Duration len = t_final - window_start_;
  out.avg_age_ns = static_cast<double>(area_x2_) / (2.0 * static_cast<double>(len));

  window_start_ = t_final;
  area_x2_ = 0;
  peak_ = 0;
  deliveries_ = 0;
  return out;
}

}  // namespace agectl
