#include "agectl/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>
#include <random>

namespace agectl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// One RNG stream per subsystem, derived from the run seed by a fixed offset,
// so adding draws to one subsystem never perturbs the others.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream)));
}

struct EventCompare {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.order > b.order;
  }
};

class Simulator {
 public:
  Simulator(const ExperimentConfig& cfg, std::uint64_t seed)
      : cfg_(cfg),
        seed_(seed),
        fwd_delay_rng_(make_stream(seed, 1)),
        fwd_loss_rng_(make_stream(seed, 2)),
        rev_delay_rng_(make_stream(seed, 3)),
        rev_loss_rng_(make_stream(seed, 4)),
        fault_rng_(make_stream(seed, 5)),
        session_(cfg.policy) {}

  SimResult run();

 private:
  void schedule(Timestamp t, SimEventKind kind, std::uint32_t seq = 0,
                std::uint64_t token = 0, bool flag = false) {
    queue_.push(SimEvent{t, kind, ++order_, seq, token, flag});
  }

  Duration sample_jitter(std::mt19937_64& rng) {
    switch (cfg_.channel.jitter) {
      case JitterKind::Constant:
        return 0;
      case JitterKind::Exponential: {
        if (cfg_.channel.jitter_mean_ms <= 0) return 0;
        std::exponential_distribution<double> d(1.0 / cfg_.channel.jitter_mean_ms);
        return dur_from_ms(d(rng));
      }
      case JitterKind::Lognormal: {
        std::lognormal_distribution<double> d(cfg_.channel.jitter_mu,
                                              cfg_.channel.jitter_sigma);
        return dur_from_ms(d(rng));
      }
    }
    return 0;
  }

  bool sample_loss(std::mt19937_64& rng) {
    if (cfg_.channel.loss_prob <= 0) return false;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(rng) < cfg_.channel.loss_prob;
  }

  void note_activity(Timestamp t) { last_activity_ = std::max(last_activity_, t); }

  std::uint64_t pending_data() const {
    return pending_events_ + hold_.size() + svc_queue_.size();
  }

  void maybe_schedule_send(Timestamp now);
  void handle_send(const SimEvent& ev);
  void handle_channel_deliver(const SimEvent& ev);
  void start_service(Timestamp now);
  void handle_service_complete(const SimEvent& ev);
  void deliver_to_monitor(std::uint32_t seq, Timestamp t);
  void release_burst(Timestamp t);
  void handle_coalesce_flush(const SimEvent& ev);
  void handle_ack_deliver(const SimEvent& ev);
  void handle_fault_toggle(const SimEvent& ev);
  void handle_boundary(const SimEvent& ev);
  void finalize();

  ExperimentConfig cfg_;
  std::uint64_t seed_;
  std::mt19937_64 fwd_delay_rng_, fwd_loss_rng_, rev_delay_rng_, rev_loss_rng_, fault_rng_;

  PolicySession session_;
  AgeTracker monitor_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventCompare> queue_;
  std::uint64_t order_{0};

  // monitor inbound queue: FIFO service, or coalescing hold while faulted
  struct Inbound {
    std::uint32_t seq;
    Timestamp arrival;
  };
  std::deque<Inbound> svc_queue_;
  std::deque<Inbound> hold_;
  Timestamp server_free_{};
  bool service_scheduled_{false};
  std::uint64_t service_token_{0};
  std::uint64_t flush_token_{0};
  bool fault_active_{false};

  std::uint64_t send_token_{0};
  bool send_scheduled_{false};
  std::uint64_t pending_events_{0};  // in-queue ChannelDeliver/ServiceComplete/AckDeliver

  SimResult result_;
  Timestamp last_activity_{};
  Timestamp fault_episode_start_{};
  bool done_{false};
  std::uint64_t processed_events_{0};
};

void Simulator::maybe_schedule_send(Timestamp now) {
  if (send_scheduled_) return;
  if (session_.sent() >= cfg_.packets) return;
  const Timestamp t = session_.next_send_time();
  if (t == kNoTime) return;
  schedule(std::max(t, now), SimEventKind::SendUpdate, 0, ++send_token_);
  send_scheduled_ = true;
}

void Simulator::handle_send(const SimEvent& ev) {
  if (ev.token != send_token_) return;  // superseded by a rate change
  send_scheduled_ = false;
  if (session_.sent() >= cfg_.packets) return;

  const std::uint32_t seq = session_.next_seq();
  session_.note_sent(ev.time);
  result_.packets.push_back(PacketRecord{seq, ev.time, std::nullopt, std::nullopt, false, false});
  note_activity(ev.time);

  if (sample_loss(fwd_loss_rng_)) {
    result_.packets[seq].fwd_lost = true;
    ++result_.agg.fwd_lost;
  } else {
    const Duration delay = cfg_.channel.base_one_way_delay + sample_jitter(fwd_delay_rng_);
    schedule(ev.time + delay, SimEventKind::ChannelDeliver, seq);
    ++pending_events_;
  }
  maybe_schedule_send(ev.time);
}

void Simulator::handle_channel_deliver(const SimEvent& ev) {
  --pending_events_;
  if (fault_active_) {
    hold_.push_back({ev.seq, ev.time});
    if (hold_.size() == 1)
      schedule(ev.time + cfg_.fault.flush_timeout, SimEventKind::CoalesceFlush, 0,
               ++flush_token_);
    if (static_cast<int>(hold_.size()) >= cfg_.fault.hold_count) release_burst(ev.time);
    return;
  }
  svc_queue_.push_back({ev.seq, ev.time});
  if (!service_scheduled_) start_service(ev.time);
}

void Simulator::start_service(Timestamp now) {
  const Timestamp begin = std::max(now, server_free_);
  schedule(begin + cfg_.channel.service_time, SimEventKind::ServiceComplete, 0,
           ++service_token_);
  service_scheduled_ = true;
  ++pending_events_;
}

void Simulator::handle_service_complete(const SimEvent& ev) {
  --pending_events_;
  if (ev.token != service_token_) return;  // cancelled by a fault activation
  service_scheduled_ = false;
  server_free_ = ev.time;
  const Inbound pkt = svc_queue_.front();
  svc_queue_.pop_front();
  deliver_to_monitor(pkt.seq, ev.time);
  if (!fault_active_ && !svc_queue_.empty()) start_service(ev.time);
}

void Simulator::deliver_to_monitor(std::uint32_t seq, Timestamp t) {
  monitor_.apply(DeliveryEvent{result_.packets[seq].send_time, t, seq});
  result_.packets[seq].monitor_recv = t;
  ++result_.agg.delivered;
  note_activity(t);
  // echo back in place of an ACK
  if (sample_loss(rev_loss_rng_)) {
    result_.packets[seq].ack_lost = true;
    ++result_.agg.ack_lost;
    return;
  }
  const Duration delay = cfg_.channel.base_one_way_delay + sample_jitter(rev_delay_rng_);
  schedule(t + delay, SimEventKind::AckDeliver, seq);
  ++pending_events_;
}

void Simulator::release_burst(Timestamp t) {
  ++flush_token_;  // cancel any pending flush timer
  while (!hold_.empty()) {
    deliver_to_monitor(hold_.front().seq, t);
    hold_.pop_front();
  }
}

void Simulator::handle_coalesce_flush(const SimEvent& ev) {
  if (ev.token != flush_token_) return;
  if (!fault_active_ || hold_.empty()) return;
  release_burst(ev.time);
}

void Simulator::handle_ack_deliver(const SimEvent& ev) {
  --pending_events_;
  session_.on_ack(ev.seq, result_.packets[ev.seq].send_time, ev.time);
  result_.packets[ev.seq].ack_recv = ev.time;
  note_activity(ev.time);
  maybe_schedule_send(ev.time);
}

void Simulator::handle_fault_toggle(const SimEvent& ev) {
  if (ev.flag) {
    fault_active_ = true;
    fault_episode_start_ = ev.time;
    // the buffer bug halts per-packet processing: anything queued joins the hold
    ++service_token_;
    service_scheduled_ = false;
    while (!svc_queue_.empty()) {
      hold_.push_back(svc_queue_.front());
      svc_queue_.pop_front();
    }
    if (!hold_.empty()) {
      const Timestamp due = hold_.front().arrival + cfg_.fault.flush_timeout;
      schedule(std::max(due, ev.time), SimEventKind::CoalesceFlush, 0, ++flush_token_);
      if (static_cast<int>(hold_.size()) >= cfg_.fault.hold_count) release_burst(ev.time);
    }
    schedule(ev.time + cfg_.fault.duration, SimEventKind::FaultToggle, 0, 0, false);
  } else {
    fault_active_ = false;
    if (!hold_.empty()) release_burst(ev.time);
    ++flush_token_;
    result_.fault_episodes.emplace_back(fault_episode_start_, ev.time);
    if (cfg_.fault.mode == FaultMode::Random) {
      std::exponential_distribution<double> gap(1.0 / cfg_.fault.mean_interarrival_s);
      schedule(ev.time + dur_from_s(gap(fault_rng_)), SimEventKind::FaultToggle, 0, 0, true);
    }
  }
}

void Simulator::handle_boundary(const SimEvent& ev) {
  session_.on_control(ev.time);
  schedule(session_.next_control_time(), SimEventKind::EpochBoundary);
  // a transition may have moved the next send instant
  ++send_token_;
  send_scheduled_ = false;
  maybe_schedule_send(ev.time);
}

void Simulator::finalize() {
  const Timestamp t_end = last_activity_;
  session_.finalize(t_end);
  result_.epochs = session_.rows();
  result_.end_time = t_end;
  if (t_end > monitor_.window_start()) result_.monitor_summary = monitor_.close_window(t_end);
  result_.sender_summary = session_.session_age_summary();
  result_.agg.sent = session_.sent();
  result_.agg.acked_unique = session_.acked_unique();
  result_.agg.duplicate_acks = session_.duplicate_acks();
  result_.agg.inflight_at_end =
      result_.agg.sent - result_.agg.delivered - result_.agg.fwd_lost;

  const SimAggregates counters = result_.agg;  // keep transport counters
  result_.agg = compute_aggregates(result_.epochs, cfg_.policy.peak_age_threshold);
  result_.agg.sent = counters.sent;
  result_.agg.delivered = counters.delivered;
  result_.agg.fwd_lost = counters.fwd_lost;
  result_.agg.ack_lost = counters.ack_lost;
  result_.agg.acked_unique = counters.acked_unique;
  result_.agg.duplicate_acks = counters.duplicate_acks;
  result_.agg.inflight_at_end = counters.inflight_at_end;

  if (!result_.fault_episodes.empty()) {
    const Timestamp fault_end = result_.fault_episodes.back().second;
    std::int64_t idx = 0;
    bool found = false;
    for (const auto& row : result_.epochs) {
      if (row.t_start < fault_end) continue;
      if (row.avg_age_ns < static_cast<double>(cfg_.policy.peak_age_threshold)) {
        found = true;
        break;
      }
      ++idx;
    }
    if (found) result_.agg.time_to_recovery_epochs = idx;
  }
  done_ = true;
}

SimResult Simulator::run() {
  cfg_.validate();
  result_.config = cfg_;
  result_.seed = seed_;
  if (cfg_.packets == 0) {
    done_ = true;
    return result_;
  }

  if (cfg_.fault.mode == FaultMode::Scheduled) {
    schedule(cfg_.fault.scheduled_start, SimEventKind::FaultToggle, 0, 0, true);
  } else if (cfg_.fault.mode == FaultMode::Random) {
    std::exponential_distribution<double> gap(1.0 / cfg_.fault.mean_interarrival_s);
    schedule(Timestamp{} + dur_from_s(gap(fault_rng_)), SimEventKind::FaultToggle, 0, 0,
             true);
  }
  schedule(session_.next_control_time(), SimEventKind::EpochBoundary);
  maybe_schedule_send(Timestamp{});

  const std::uint64_t event_budget = 500 * cfg_.packets + 1'000'000;
  while (!queue_.empty()) {
    const SimEvent ev = queue_.top();
    queue_.pop();
    if (++processed_events_ > event_budget)
      throw SimError("simulation divergence: event budget exhausted");

    const bool drained = session_.sent() >= cfg_.packets && pending_data() == 0;
    if (drained && (ev.kind == SimEventKind::EpochBoundary ||
                    ev.kind == SimEventKind::FaultToggle ||
                    ev.kind == SimEventKind::SendUpdate)) {
      finalize();
      return result_;
    }

    switch (ev.kind) {
      case SimEventKind::SendUpdate: handle_send(ev); break;
      case SimEventKind::ChannelDeliver: handle_channel_deliver(ev); break;
      case SimEventKind::ServiceComplete: handle_service_complete(ev); break;
      case SimEventKind::AckDeliver: handle_ack_deliver(ev); break;
      case SimEventKind::CoalesceFlush: handle_coalesce_flush(ev); break;
      case SimEventKind::FaultToggle: handle_fault_toggle(ev); break;
      case SimEventKind::EpochBoundary: handle_boundary(ev); break;
    }
  }
  if (!done_) throw SimError("simulation divergence: event queue starved before drain");
  return result_;
}

}  // namespace

SimAggregates compute_aggregates(const std::vector<EpochStats>& rows,
                                 Duration peak_age_threshold) {
  SimAggregates agg;
  if (rows.empty()) return agg;

  double area = 0, span = 0, sum = 0;
  std::vector<double> ages;
  ages.reserve(rows.size());
  for (const auto& r : rows) {
    area += r.avg_age_ns * static_cast<double>(r.epoch_len);
    span += static_cast<double>(r.epoch_len);
    sum += r.avg_age_ns;
    ages.push_back(r.avg_age_ns);
    if (r.action) {
      ++agg.lambda_updates;
      if (r.clamped) ++agg.clamped_updates;
    }
    if (r.avg_age_ns > static_cast<double>(peak_age_threshold)) ++agg.peak_age_violations;
  }
  agg.weighted_mean_age_ns = span > 0 ? area / span : 0;
  agg.mean_age_ns = sum / static_cast<double>(rows.size());

  std::sort(ages.begin(), ages.end());
  const size_t n = ages.size();
  agg.median_age_ns = n % 2 ? ages[n / 2] : 0.5 * (ages[n / 2 - 1] + ages[n / 2]);

  double var = 0;
  for (double a : ages) var += (a - agg.mean_age_ns) * (a - agg.mean_age_ns);
  agg.variance_age_ns2 = var / static_cast<double>(n);

  agg.clamp_fraction = agg.lambda_updates > 0
                           ? static_cast<double>(agg.clamped_updates) /
                                 static_cast<double>(agg.lambda_updates)
                           : 0.0;
  return agg;
}

SimResult run_simulation(const ExperimentConfig& config, std::uint64_t seed) {
  Simulator sim(config, seed);
  return sim.run();
}

SimResult issue3_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  ExperimentConfig cfg = config;
  cfg.fault.mode = FaultMode::Scheduled;
  return run_simulation(cfg, seed);
}

}  // namespace agectl
