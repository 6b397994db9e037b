#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agectl/age_metrics.hpp"
#include "agectl/link_estimators.hpp"
#include "agectl/nanotime.hpp"

namespace agectl {

enum class PolicyKind { FixedRate, Lazy, Acp, AcpPlusOriginal, AcpPlusModified };

const char* to_string(PolicyKind k);
std::optional<PolicyKind> policy_kind_from_string(const std::string& s);

inline bool is_acp_family(PolicyKind k) {
  return k == PolicyKind::Acp || k == PolicyKind::AcpPlusOriginal ||
         k == PolicyKind::AcpPlusModified;
}
inline bool is_acp_plus(PolicyKind k) {
  return k == PolicyKind::AcpPlusOriginal || k == PolicyKind::AcpPlusModified;
}

enum class ActionType { Inc, Dec, Mdec };

struct ActionKind {
  ActionType type{ActionType::Inc};
  int gamma{0};  // >= 1 for Mdec, 0 otherwise

  static ActionKind inc() { return {ActionType::Inc, 0}; }
  static ActionKind dec() { return {ActionType::Dec, 0}; }
  static ActionKind mdec(int gamma) { return {ActionType::Mdec, gamma}; }
  bool operator==(const ActionKind&) const = default;
};

std::string to_string(const ActionKind& a);
std::optional<ActionKind> action_from_string(const std::string& s);

// Controller knobs. Clamp bounds of 0 select the per-kind defaults
// (1.25/0.75 original, 1.1/0.9 modified).
struct PolicyConfig {
  PolicyKind kind{PolicyKind::Acp};
  double kappa{0.1};           // forced to 1 for the ACP+ kinds
  int epoch_multiplier{30};    // M: epochs span M * min(rtt,z) or M / lambda
  double clamp_hi{0};
  double clamp_lo{0};
  double ewma_alpha{0.125};
  double lambda_min{0.1};      // packets/s
  double lambda_max{1000.0};
  Duration min_epoch_len{dur_ms(1)};
  double fixed_lambda{10.0};   // FixedRate only
  bool feedback_enabled{false};
  Duration peak_age_threshold{dur_ms(200)};
  bool tie_sign_positive{true};  // sign convention for zero-valued deltas
  int mdec_gamma_cap{10};
  int init_packets{10};
  Duration init_spacing{dur_ms(100)};
  Duration init_timeout{dur_s(1)};
  int init_retries{3};

  double effective_kappa() const { return is_acp_plus(kind) ? 1.0 : kappa; }
  double effective_clamp_hi() const {
    if (clamp_hi > 0) return clamp_hi;
    return kind == PolicyKind::AcpPlusModified ? 1.1 : 1.25;
  }
  double effective_clamp_lo() const {
    if (clamp_lo > 0) return clamp_lo;
    return kind == PolicyKind::AcpPlusModified ? 0.9 : 0.75;
  }
  void validate() const;
};

// Decision memory shared by the per-epoch controller steps.
struct PolicyState {
  double prev_avg_age_ns{0};
  double prev_avg_backlog{0};
  int gamma{0};               // current MDEC escalation level (0 = none)
  bool prev_decrease{false};  // last action was DEC or MDEC
  bool tie_sign_positive{true};
  int gamma_cap{10};
};

// Maps the signs of delta_k (age change) and b_k (backlog change) to an
// action. Equal signs target a backlog decrease, opposite signs an increase.
// Consecutive decrease targets in which the backlog failed to fall escalate
// to multiplicative decrease with growing gamma; any increase resets it.
ActionKind decide_action(PolicyState& st, double delta_k, double b_k);

// Desired backlog change for the next epoch: +kappa, -kappa, or
// -(1 - 2^-gamma) * B_k.
double target_backlog_change(const ActionKind& action, double kappa, double avg_backlog);

struct LambdaUpdate {
  double lambda{0};
  bool clamped{false};
};

// Computes the next update rate from the estimator state and the desired
// backlog change, applying the per-kind clamping band and the global bounds.
LambdaUpdate next_lambda(PolicyKind kind, double z_bar_ns, double rtt_bar_ns,
                         double b_star, double lambda_prev, const PolicyConfig& cfg);

// Epoch length: M * min(rtt_bar, z_bar) for rate-from-estimate policies,
// M / lambda for the ACP+ and fixed-rate kinds; floored at min_len.
Duration next_epoch_length(PolicyKind kind, double z_bar_ns, double rtt_bar_ns,
                           double lambda, int multiplier, Duration min_len);

inline double lazy_epoch_end(double rtt_bar_ns) {
  if (!(rtt_bar_ns > 0)) throw std::invalid_argument("lazy: rtt must be positive");
  return 1e9 / rtt_bar_ns;
}

// Time-average of the instantaneous backlog, where backlog is the distance
// between the highest sequence sent and the highest acknowledged. Cumulative
// semantics keep lost packets from inflating the signal forever (the
// protocol never retransmits).
class BacklogIntegrator {
 public:
  explicit BacklogIntegrator(Timestamp start = {})
      : window_start_(start), last_t_(start) {}

  void on_send(std::uint32_t seq, Timestamp t);
  void on_ack(std::uint32_t seq, Timestamp t);
  double close(Timestamp t);  // average over the window; starts the next one
  std::int64_t current() const { return backlog_; }

 private:
  void advance(Timestamp t);

  Timestamp window_start_;
  Timestamp last_t_;
  AreaNs2 area_{0};  // ns * packets
  std::int64_t backlog_{0};
  std::int64_t highest_sent_{-1};
  std::int64_t highest_acked_{-1};
};

// One trace row: the observable state of epoch k plus the transition taken
// at its end. Estimator columns are post-feedback end-of-epoch values.
struct EpochStats {
  std::uint64_t k{0};
  Timestamp t_start;
  Timestamp t_end;
  double avg_age_ns{0};
  Duration peak_age{0};
  double avg_backlog{0};
  double lambda{0};        // rate in force during this epoch
  Duration epoch_len{0};
  std::optional<ActionKind> action;  // absent for Lazy/FixedRate and final rows
  double rtt_bar_ns{0};
  double z_bar_ns{0};
  bool clamped{false};     // transition at end of this epoch hit a clamp bound
  std::uint32_t zeta{0};
};

// Raised when the initialization phase exhausts its retries without an ACK.
struct InitAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Transport-agnostic sender-side controller. A driver (simulator or socket
// runner) owns the clock and the wire; the session owns every protocol
// decision. The driver asks when to act, performs the action, and reports
// what happened:
//
//   next_send_time()    when the next update should leave
//   next_control_time() when the next init review / epoch boundary is due
//   note_sent / on_ack  transport notifications
//   on_control          runs the boundary; may emit a finished epoch row
//   finalize            closes the trailing partial epoch
class PolicySession {
 public:
  PolicySession(const PolicyConfig& cfg, Timestamp start = {});

  Timestamp next_send_time() const { return next_send_; }
  Timestamp next_control_time() const { return next_control_; }
  std::uint32_t next_seq() const { return next_seq_; }

  void note_sent(Timestamp t);
  void on_ack(std::uint32_t seq, Timestamp gen_time, Timestamp t);
  std::optional<EpochStats> on_control(Timestamp t);
  std::optional<EpochStats> finalize(Timestamp t);

  bool in_init() const { return phase_ == Phase::Init; }
  double lambda() const { return lambda_; }
  bool estimates_ready() const { return link_.rtt_initialized(); }
  double rtt_bar_ns() const { return link_.rtt_bar_ns(); }
  double z_bar_ns() const { return link_.z_bar_ns(); }
  std::uint32_t zeta() const { return link_.zeta(); }

  const std::vector<EpochStats>& rows() const { return rows_; }

  // Whole-run source-side estimate, aggregated exactly over epoch windows.
  EpochAgeSummary session_age_summary() const;

  std::uint64_t sent() const { return sent_; }
  std::uint64_t acked_unique() const { return acked_unique_; }
  std::uint64_t duplicate_acks() const { return duplicate_acks_; }
  Duration min_rtt_seen() const { return min_rtt_seen_; }

 private:
  enum class Phase { Init, Epochs };

  Duration send_spacing() const;
  void enter_epochs(Timestamp t);
  void schedule_after_transition(Timestamp t);
  EpochStats close_epoch(Timestamp t, bool run_transition);

  PolicyConfig cfg_;
  Phase phase_{Phase::Init};
  LinkEstimators link_;
  AgeTracker estimate_;          // source-side age from ACK arrivals
  BacklogIntegrator backlog_;
  PolicyState decision_;

  // init phase
  Timestamp init_batch_start_;
  int init_sent_in_batch_{0};
  int init_attempts_{0};
  std::vector<Duration> init_rtt_samples_;

  // epochs phase
  std::uint64_t epoch_k_{0};
  Timestamp epoch_start_{};
  double lambda_{0};

  Timestamp next_send_{};
  Timestamp next_control_{};
  Timestamp last_send_{};

  std::uint32_t next_seq_{0};
  std::vector<Timestamp> send_times_;
  std::vector<bool> acked_;
  std::uint64_t sent_{0};
  std::uint64_t acked_unique_{0};
  std::uint64_t duplicate_acks_{0};
  Duration min_rtt_seen_{std::numeric_limits<Duration>::max()};

  std::vector<EpochStats> rows_;
  AreaNs2 session_area_x2_{0};
  Duration session_peak_{0};
  std::uint64_t session_deliveries_{0};
  Timestamp session_window_begin_{};
  Timestamp session_window_end_{};
  bool session_window_open_{false};
};

}  // namespace agectl
