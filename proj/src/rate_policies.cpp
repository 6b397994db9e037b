#include "agectl/rate_policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace agectl {

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::FixedRate: return "fixed";
    case PolicyKind::Lazy: return "lazy";
    case PolicyKind::Acp: return "acp";
    case PolicyKind::AcpPlusOriginal: return "acp+";
    case PolicyKind::AcpPlusModified: return "acp+mod";
  }
  return "?";
}

std::optional<PolicyKind> policy_kind_from_string(const std::string& s) {
  if (s == "fixed") return PolicyKind::FixedRate;
  if (s == "lazy") return PolicyKind::Lazy;
  if (s == "acp") return PolicyKind::Acp;
  if (s == "acp+") return PolicyKind::AcpPlusOriginal;
  if (s == "acp+mod") return PolicyKind::AcpPlusModified;
  return std::nullopt;
}

std::string to_string(const ActionKind& a) {
  switch (a.type) {
    case ActionType::Inc: return "INC";
    case ActionType::Dec: return "DEC";
    case ActionType::Mdec: return "MDEC:" + std::to_string(a.gamma);
  }
  return "?";
}

std::optional<ActionKind> action_from_string(const std::string& s) {
  if (s == "INC") return ActionKind::inc();
  if (s == "DEC") return ActionKind::dec();
  if (s.rfind("MDEC:", 0) == 0) {
    try {
      int g = std::stoi(s.substr(5));
      if (g >= 1) return ActionKind::mdec(g);
    } catch (...) {
    }
  }
  return std::nullopt;
}

void PolicyConfig::validate() const {
  if (!(kappa > 0)) throw std::invalid_argument("kappa must be positive");
  if (epoch_multiplier < 1) throw std::invalid_argument("epoch_multiplier must be >= 1");
  if (!(ewma_alpha > 0) || ewma_alpha > 1)
    throw std::invalid_argument("ewma_alpha must be in (0,1]");
  if (!(lambda_min > 0) || !(lambda_max >= lambda_min))
    throw std::invalid_argument("lambda bounds must satisfy 0 < min <= max");
  if (min_epoch_len <= 0) throw std::invalid_argument("min_epoch_len must be positive");
  if (!(fixed_lambda > 0)) throw std::invalid_argument("fixed_lambda must be positive");
  if (peak_age_threshold <= 0)
    throw std::invalid_argument("peak_age_threshold must be positive");
  if (mdec_gamma_cap < 1) throw std::invalid_argument("mdec_gamma_cap must be >= 1");
  if (init_packets < 1) throw std::invalid_argument("init_packets must be >= 1");
  if (init_spacing <= 0 || init_timeout <= 0)
    throw std::invalid_argument("init timings must be positive");
  if (init_retries < 0) throw std::invalid_argument("init_retries must be >= 0");
  const double hi = effective_clamp_hi();
  const double lo = effective_clamp_lo();
  if (!(lo < 1.0 && 1.0 < hi))
    throw std::invalid_argument("clamp bounds must satisfy lo < 1 < hi");
}

ActionKind decide_action(PolicyState& st, double delta_k, double b_k) {
  const auto positive = [&](double v) { return v > 0 || (v == 0 && st.tie_sign_positive); };
  const bool decrease_target = positive(delta_k) == positive(b_k);
  if (!decrease_target) {
    st.gamma = 0;
    st.prev_decrease = false;
    return ActionKind::inc();
  }
  if (st.prev_decrease && b_k >= 0) {
    st.gamma = std::min(st.gamma + 1, st.gamma_cap);
    return ActionKind::mdec(st.gamma);
  }
  st.gamma = 0;
  st.prev_decrease = true;
  return ActionKind::dec();
}

double target_backlog_change(const ActionKind& action, double kappa, double avg_backlog) {
  switch (action.type) {
    case ActionType::Inc: return kappa;
    case ActionType::Dec: return -kappa;
    case ActionType::Mdec:
      if (action.gamma < 1) throw std::invalid_argument("MDEC gamma must be >= 1");
      if (avg_backlog < 0) throw std::invalid_argument("backlog must be non-negative");
      return -(1.0 - std::ldexp(1.0, -action.gamma)) * avg_backlog;
  }
  throw std::logic_error("unknown action");
}

LambdaUpdate next_lambda(PolicyKind kind, double z_bar_ns, double rtt_bar_ns,
                         double b_star, double lambda_prev, const PolicyConfig& cfg) {
  if (!(z_bar_ns > 0) || !(rtt_bar_ns > 0) || !(lambda_prev > 0))
    throw std::invalid_argument("next_lambda requires positive estimates");
  const double z_s = z_bar_ns / 1e9;
  const double rtt_s = rtt_bar_ns / 1e9;

  double raw = lambda_prev;
  bool clamped = false;
  switch (kind) {
    case PolicyKind::FixedRate:
      break;
    case PolicyKind::Lazy:
      raw = 1.0 / rtt_s;
      break;
    case PolicyKind::Acp:
      raw = 1.0 / z_s + b_star / std::min(rtt_s, z_s);
      break;
    case PolicyKind::AcpPlusOriginal:
    case PolicyKind::AcpPlusModified: {
      raw = 1.0 / z_s + b_star / rtt_s;
      const double lo = cfg.effective_clamp_lo() * lambda_prev;
      const double hi = cfg.effective_clamp_hi() * lambda_prev;
      if (raw < lo) {
        raw = lo;
        clamped = true;
      } else if (raw > hi) {
        raw = hi;
        clamped = true;
      }
      break;
    }
  }
  if (!(raw > 0)) {
    raw = cfg.lambda_min;
    clamped = true;
  }
  raw = std::clamp(raw, cfg.lambda_min, cfg.lambda_max);
  return {raw, clamped};
}

Duration next_epoch_length(PolicyKind kind, double z_bar_ns, double rtt_bar_ns,
                           double lambda, int multiplier, Duration min_len) {
  double len_ns = 0;
  switch (kind) {
    case PolicyKind::Acp:
    case PolicyKind::Lazy:
      if (!(z_bar_ns > 0) || !(rtt_bar_ns > 0))
        throw std::invalid_argument("epoch length requires positive estimates");
      len_ns = multiplier * std::min(rtt_bar_ns, z_bar_ns);
      break;
    case PolicyKind::AcpPlusOriginal:
    case PolicyKind::AcpPlusModified:
    case PolicyKind::FixedRate:
      if (!(lambda > 0)) throw std::invalid_argument("epoch length requires positive lambda");
      len_ns = multiplier * 1e9 / lambda;
      break;
  }
  auto len = static_cast<Duration>(std::llround(len_ns));
  return std::max(len, min_len);
}

void BacklogIntegrator::advance(Timestamp t) {
  if (t < last_t_) throw std::invalid_argument("backlog integrator moved backwards");
  area_ += static_cast<AreaNs2>(backlog_) * (t - last_t_);
  last_t_ = t;
}

void BacklogIntegrator::on_send(std::uint32_t seq, Timestamp t) {
  advance(t);
  if (static_cast<std::int64_t>(seq) > highest_sent_) highest_sent_ = seq;
  backlog_ = std::max<std::int64_t>(0, highest_sent_ - highest_acked_);
}

void BacklogIntegrator::on_ack(std::uint32_t seq, Timestamp t) {
  advance(t);
  if (static_cast<std::int64_t>(seq) > highest_acked_) highest_acked_ = seq;
  backlog_ = std::max<std::int64_t>(0, highest_sent_ - highest_acked_);
}

double BacklogIntegrator::close(Timestamp t) {
  advance(t);
  const Duration len = t - window_start_;
  const double avg =
      len > 0 ? static_cast<double>(area_) / static_cast<double>(len)
              : static_cast<double>(backlog_);
  area_ = 0;
  window_start_ = t;
  return avg;
}

PolicySession::PolicySession(const PolicyConfig& cfg, Timestamp start)
    : cfg_(cfg),
      link_(cfg.ewma_alpha,
            FeedbackState{cfg.feedback_enabled, cfg.peak_age_threshold, 0, std::nullopt}),
      estimate_(start),
      backlog_(start),
      init_batch_start_(start) {
  cfg_.validate();
  decision_.tie_sign_positive = cfg_.tie_sign_positive;
  decision_.gamma_cap = cfg_.mdec_gamma_cap;

  if (cfg_.kind == PolicyKind::FixedRate) {
    // A fixed-rate baseline has nothing to learn from an init phase.
    phase_ = Phase::Epochs;
    lambda_ = std::clamp(cfg_.fixed_lambda, cfg_.lambda_min, cfg_.lambda_max);
    epoch_start_ = start;
    session_window_begin_ = start;
    session_window_open_ = true;
    next_send_ = start;
    next_control_ = start + next_epoch_length(cfg_.kind, 1.0, 1.0, lambda_,
                                              cfg_.epoch_multiplier, cfg_.min_epoch_len);
  } else {
    phase_ = Phase::Init;
    next_send_ = start;
    next_control_ = start + static_cast<Duration>(cfg_.init_packets - 1) * cfg_.init_spacing +
                    cfg_.init_timeout;
  }
}

Duration PolicySession::send_spacing() const {
  return std::max<Duration>(1, static_cast<Duration>(std::llround(1e9 / lambda_)));
}

void PolicySession::note_sent(Timestamp t) {
  send_times_.push_back(t);
  acked_.push_back(false);
  backlog_.on_send(next_seq_, t);
  ++next_seq_;
  ++sent_;
  last_send_ = t;
  if (phase_ == Phase::Init) {
    ++init_sent_in_batch_;
    next_send_ = init_sent_in_batch_ < cfg_.init_packets
                     ? init_batch_start_ +
                           static_cast<Duration>(init_sent_in_batch_) * cfg_.init_spacing
                     : kNoTime;
  } else {
    next_send_ = t + send_spacing();
  }
}

void PolicySession::on_ack(std::uint32_t seq, Timestamp gen_time, Timestamp t) {
  if (seq >= send_times_.size()) return;  // not one of ours
  const bool duplicate = acked_[seq];
  // a degenerate zero-delay loop still counts as a (1 ns) sample
  const Duration rtt = std::max<Duration>(1, t - send_times_[seq]);
  link_.on_ack(AckRecord{seq, gen_time, t, rtt}, duplicate);
  estimate_.apply(DeliveryEvent{gen_time, t, seq});
  backlog_.on_ack(seq, t);
  if (duplicate) {
    ++duplicate_acks_;
    return;
  }
  acked_[seq] = true;
  ++acked_unique_;
  min_rtt_seen_ = std::min(min_rtt_seen_, rtt);
  if (phase_ == Phase::Init) init_rtt_samples_.push_back(rtt);
}

void PolicySession::enter_epochs(Timestamp t) {
  const double mean =
      std::accumulate(init_rtt_samples_.begin(), init_rtt_samples_.end(), 0.0,
                      [](double acc, Duration d) { return acc + static_cast<double>(d); }) /
      static_cast<double>(init_rtt_samples_.size());
  link_.seed_rtt(mean);
  link_.feedback().rtt_min_epoch.reset();  // epoch minima start fresh

  phase_ = Phase::Epochs;
  lambda_ = std::clamp(1e9 / mean, cfg_.lambda_min, cfg_.lambda_max);
  epoch_k_ = 0;
  epoch_start_ = t;
  if (t > estimate_.window_start()) estimate_.close_window(t);  // drop init segment
  backlog_.close(t);
  session_window_begin_ = t;
  session_window_open_ = true;
  schedule_after_transition(t);
}

void PolicySession::schedule_after_transition(Timestamp t) {
  const double rtt = link_.rtt_initialized() ? link_.rtt_bar_ns() : 1.0;
  const double z = link_.rtt_initialized() ? link_.z_bar_ns() : 1.0;
  next_control_ = t + next_epoch_length(cfg_.kind, z, rtt, lambda_,
                                        cfg_.epoch_multiplier, cfg_.min_epoch_len);
  next_send_ = sent_ > 0 ? std::max(t, last_send_ + send_spacing()) : t;
}

EpochStats PolicySession::close_epoch(Timestamp t, bool run_transition) {
  const EpochAgeSummary age = estimate_.close_window(t);
  const double avg_backlog = backlog_.close(t);

  session_area_x2_ += age.area_x2;
  session_peak_ = std::max(session_peak_, age.peak_age);
  session_deliveries_ += age.n_deliveries;
  session_window_end_ = t;

  link_.epoch_end(age.avg_age_ns);

  EpochStats row;
  row.k = epoch_k_;
  row.t_start = epoch_start_;
  row.t_end = t;
  row.avg_age_ns = age.avg_age_ns;
  row.peak_age = age.peak_age;
  row.avg_backlog = avg_backlog;
  row.lambda = lambda_;
  row.epoch_len = t - epoch_start_;
  row.rtt_bar_ns = link_.rtt_initialized() ? link_.rtt_bar_ns() : 0.0;
  row.z_bar_ns = link_.rtt_initialized() ? link_.z_bar_ns() : 0.0;
  row.zeta = link_.zeta();

  if (run_transition) {
    switch (cfg_.kind) {
      case PolicyKind::FixedRate:
        break;
      case PolicyKind::Lazy:
        if (link_.rtt_initialized())
          lambda_ = std::clamp(lazy_epoch_end(link_.rtt_bar_ns()), cfg_.lambda_min,
                               cfg_.lambda_max);
        break;
      case PolicyKind::Acp:
      case PolicyKind::AcpPlusOriginal:
      case PolicyKind::AcpPlusModified: {
        ActionKind act{};
        double b_star = 0;
        if (epoch_k_ == 0) {
          // No predecessor stats exist yet; probe upward from the init rate.
          act = ActionKind::inc();
          b_star = cfg_.effective_kappa();
          decision_.gamma = 0;
          decision_.prev_decrease = false;
        } else {
          const double delta = age.avg_age_ns - decision_.prev_avg_age_ns;
          const double b = avg_backlog - decision_.prev_avg_backlog;
          act = decide_action(decision_, delta, b);
          b_star = target_backlog_change(act, cfg_.effective_kappa(), avg_backlog);
        }
        const auto update =
            next_lambda(cfg_.kind, link_.z_bar_ns(), link_.rtt_bar_ns(), b_star, lambda_, cfg_);
        lambda_ = update.lambda;
        row.clamped = update.clamped;
        row.action = act;
        break;
      }
    }
    decision_.prev_avg_age_ns = age.avg_age_ns;
    decision_.prev_avg_backlog = avg_backlog;
  }

  ++epoch_k_;
  epoch_start_ = t;
  return row;
}

std::optional<EpochStats> PolicySession::on_control(Timestamp t) {
  if (phase_ == Phase::Init) {
    if (!init_rtt_samples_.empty()) {
      enter_epochs(t);
      return std::nullopt;
    }
    ++init_attempts_;
    if (init_attempts_ > cfg_.init_retries)
      throw InitAbort("initialization failed: no ACK received after " +
                      std::to_string(init_attempts_) + " attempt(s)");
    init_batch_start_ = t;
    init_sent_in_batch_ = 0;
    next_send_ = t;
    next_control_ = t + static_cast<Duration>(cfg_.init_packets - 1) * cfg_.init_spacing +
                    cfg_.init_timeout;
    return std::nullopt;
  }
  EpochStats row = close_epoch(t, true);
  rows_.push_back(row);
  schedule_after_transition(t);
  return row;
}

std::optional<EpochStats> PolicySession::finalize(Timestamp t) {
  if (phase_ != Phase::Epochs) return std::nullopt;
  if (t <= epoch_start_) return std::nullopt;
  EpochStats row = close_epoch(t, false);
  rows_.push_back(row);
  return row;
}

EpochAgeSummary PolicySession::session_age_summary() const {
  EpochAgeSummary s;
  if (!session_window_open_ || session_window_end_ <= session_window_begin_) return s;
  s.window_begin = session_window_begin_;
  s.window_end = session_window_end_;
  s.area_x2 = session_area_x2_;
  s.peak_age = session_peak_;
  s.n_deliveries = session_deliveries_;
  const Duration len = session_window_end_ - session_window_begin_;
  s.avg_age_ns = static_cast<double>(session_area_x2_) / (2.0 * static_cast<double>(len));
  return s;
}

}  // namespace agectl
