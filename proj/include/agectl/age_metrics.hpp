#pragma once

#include <cstdint>

#include "agectl/nanotime.hpp"

namespace agectl {

// One received status update: the generation instant of the payload and the
// instant at which the observer learned about it.
struct DeliveryEvent {
  Timestamp gen_time;
  Timestamp recv_time;
  std::uint32_t seq{0};
};

// Summary of the age process over one closed window.
struct EpochAgeSummary {
  Timestamp window_begin{};
  Timestamp window_end{};
  AreaNs2 area_x2{0};   // exact: twice the integral of age over the window, ns^2
  double avg_age_ns{0}; // area_x2 / (2 * window length)
  Duration peak_age{0};
  std::uint64_t n_deliveries{0};
};

// Piecewise-linear age sample path with exact trapezoidal accumulation.
//
// The instantaneous age at time t is t - freshest_gen(). Deliveries carrying
// a generation stamp newer than anything seen so far reset the age to
// recv - gen; stale deliveries (reordered or duplicated updates) only advance
// time. Windows close without resetting the age state, so epoch boundaries
// introduce no fringe error: the partial trapezoids on both sides of a
// boundary are accounted exactly.
class AgeTracker {
 public:
  explicit AgeTracker(Timestamp start = {}, Timestamp initial_gen = {})
      : window_start_(start), last_event_(start), freshest_gen_(initial_gen) {
    if (initial_gen > start)
      throw std::invalid_argument("initial generation stamp in the future");
  }

  // Advances time to ev.recv_time, accumulating the trapezoid under the
  // growing age line, then applies the delivery. Rejects events that move
  // backwards in time.
  void apply(const DeliveryEvent& ev);

  // Closes the window at t_final, adding the final fringe trapezoid, and
  // starts the next window there. Age state carries across the boundary.
  EpochAgeSummary close_window(Timestamp t_final);

  Duration age_at(Timestamp t) const {
    if (t < last_event_) throw std::invalid_argument("age_at before last event");
    return t - freshest_gen_;
  }

  Timestamp window_start() const { return window_start_; }
  Timestamp last_event_time() const { return last_event_; }
  Timestamp freshest_gen() const { return freshest_gen_; }
  AreaNs2 area_x2() const { return area_x2_; }
  Duration peak_age() const { return peak_; }
  std::uint64_t deliveries_in_window() const { return deliveries_; }

 private:
  void advance_to(Timestamp t);

  Timestamp window_start_;
  Timestamp last_event_;
  Timestamp freshest_gen_;
  AreaNs2 area_x2_{0};
  Duration peak_{0};
  std::uint64_t deliveries_{0};
};

}  // namespace agectl
