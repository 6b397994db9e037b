#include "agectl/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agectl {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': bad number '" + v + "'");
  }
}

long long parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (...) {
    throw std::invalid_argument("config key '" + key + "': bad integer '" + v + "'");
  }
}

bool parse_flag(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw std::invalid_argument("config key '" + key + "': expected on/off, got '" + v + "'");
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

const char* to_string(JitterKind k) {
  switch (k) {
    case JitterKind::Constant: return "constant";
    case JitterKind::Exponential: return "exponential";
    case JitterKind::Lognormal: return "lognormal";
  }
  return "?";
}

const char* to_string(FaultMode m) {
  switch (m) {
    case FaultMode::Off: return "off";
    case FaultMode::Random: return "random";
    case FaultMode::Scheduled: return "scheduled";
  }
  return "?";
}

void ChannelConfig::validate() const {
  if (base_one_way_delay < 0) throw std::invalid_argument("chan_base_owd_ms must be >= 0");
  if (jitter == JitterKind::Exponential && !(jitter_mean_ms >= 0))
    throw std::invalid_argument("chan_jitter_mean_ms must be >= 0");
  if (jitter == JitterKind::Lognormal && !(jitter_sigma >= 0))
    throw std::invalid_argument("chan_jitter_sigma must be >= 0");
  if (loss_prob < 0 || loss_prob > 1)
    throw std::invalid_argument("chan_loss must be in [0,1]");
  if (service_time < 0) throw std::invalid_argument("chan_service_ms must be >= 0");
}

void FaultConfig::validate() const {
  if (hold_count < 1) throw std::invalid_argument("fault_hold_count must be >= 1");
  if (flush_timeout <= 0) throw std::invalid_argument("fault_flush_timeout_ms must be > 0");
  if (mode == FaultMode::Random && !(mean_interarrival_s > 0))
    throw std::invalid_argument("fault_mean_interarrival_s must be > 0");
  if (mode != FaultMode::Off && duration <= 0)
    throw std::invalid_argument("fault_duration_s must be > 0");
}

void ExperimentConfig::validate() const {
  policy.validate();
  channel.validate();
  fault.validate();
  if (runs < 1) throw std::invalid_argument("runs must be >= 1");
  if (seeds.empty()) throw std::invalid_argument("seeds must not be empty");
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "policy", "kappa", "epoch_multiplier", "clamp_hi", "clamp_lo", "ewma_alpha",
      "lambda_min", "lambda_max", "min_epoch_len_ms", "fixed_lambda", "feedback",
      "peak_age_threshold_ms", "tie_zero_sign", "mdec_gamma_cap", "init_packets",
      "init_spacing_ms", "init_timeout_ms", "init_retries", "packets", "runs", "seeds",
      "chan_base_owd_ms", "chan_jitter", "chan_jitter_mean_ms", "chan_jitter_mu",
      "chan_jitter_sigma", "chan_loss", "chan_service_ms", "fault_mode",
      "fault_hold_count", "fault_flush_timeout_ms", "fault_mean_interarrival_s",
      "fault_duration_s", "fault_start_s"};
  return keys;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "policy") {
    const auto k = policy_kind_from_string(value);
    if (!k) throw std::invalid_argument("config key 'policy': unknown policy '" + value + "'");
    cfg.policy.kind = *k;
  } else if (key == "kappa") {
    cfg.policy.kappa = parse_double(key, value);
  } else if (key == "epoch_multiplier") {
    cfg.policy.epoch_multiplier = static_cast<int>(parse_int(key, value));
  } else if (key == "clamp_hi") {
    cfg.policy.clamp_hi = parse_double(key, value);
  } else if (key == "clamp_lo") {
    cfg.policy.clamp_lo = parse_double(key, value);
  } else if (key == "ewma_alpha") {
    cfg.policy.ewma_alpha = parse_double(key, value);
  } else if (key == "lambda_min") {
    cfg.policy.lambda_min = parse_double(key, value);
  } else if (key == "lambda_max") {
    cfg.policy.lambda_max = parse_double(key, value);
  } else if (key == "min_epoch_len_ms") {
    cfg.policy.min_epoch_len = dur_from_ms(parse_double(key, value));
  } else if (key == "fixed_lambda") {
    cfg.policy.fixed_lambda = parse_double(key, value);
  } else if (key == "feedback") {
    cfg.policy.feedback_enabled = parse_flag(key, value);
  } else if (key == "peak_age_threshold_ms") {
    cfg.policy.peak_age_threshold = dur_from_ms(parse_double(key, value));
  } else if (key == "tie_zero_sign") {
    if (value == "positive")
      cfg.policy.tie_sign_positive = true;
    else if (value == "negative")
      cfg.policy.tie_sign_positive = false;
    else
      throw std::invalid_argument("config key 'tie_zero_sign': expected positive/negative");
  } else if (key == "mdec_gamma_cap") {
    cfg.policy.mdec_gamma_cap = static_cast<int>(parse_int(key, value));
  } else if (key == "init_packets") {
    cfg.policy.init_packets = static_cast<int>(parse_int(key, value));
  } else if (key == "init_spacing_ms") {
    cfg.policy.init_spacing = dur_from_ms(parse_double(key, value));
  } else if (key == "init_timeout_ms") {
    cfg.policy.init_timeout = dur_from_ms(parse_double(key, value));
  } else if (key == "init_retries") {
    cfg.policy.init_retries = static_cast<int>(parse_int(key, value));
  } else if (key == "packets") {
    cfg.packets = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "runs") {
    cfg.runs = static_cast<int>(parse_int(key, value));
  } else if (key == "seeds") {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) seeds.push_back(static_cast<std::uint64_t>(parse_int(key, item)));
    }
    if (seeds.empty()) throw std::invalid_argument("config key 'seeds': empty list");
    cfg.seeds = seeds;
  } else if (key == "chan_base_owd_ms") {
    cfg.channel.base_one_way_delay = dur_from_ms(parse_double(key, value));
  } else if (key == "chan_jitter") {
    if (value == "constant")
      cfg.channel.jitter = JitterKind::Constant;
    else if (value == "exponential")
      cfg.channel.jitter = JitterKind::Exponential;
    else if (value == "lognormal")
      cfg.channel.jitter = JitterKind::Lognormal;
    else
      throw std::invalid_argument("config key 'chan_jitter': unknown kind '" + value + "'");
  } else if (key == "chan_jitter_mean_ms") {
    cfg.channel.jitter_mean_ms = parse_double(key, value);
  } else if (key == "chan_jitter_mu") {
    cfg.channel.jitter_mu = parse_double(key, value);
  } else if (key == "chan_jitter_sigma") {
    cfg.channel.jitter_sigma = parse_double(key, value);
  } else if (key == "chan_loss") {
    cfg.channel.loss_prob = parse_double(key, value);
  } else if (key == "chan_service_ms") {
    cfg.channel.service_time = dur_from_ms(parse_double(key, value));
  } else if (key == "fault_mode") {
    if (value == "off")
      cfg.fault.mode = FaultMode::Off;
    else if (value == "random")
      cfg.fault.mode = FaultMode::Random;
    else if (value == "scheduled")
      cfg.fault.mode = FaultMode::Scheduled;
    else
      throw std::invalid_argument("config key 'fault_mode': unknown mode '" + value + "'");
  } else if (key == "fault_hold_count") {
    cfg.fault.hold_count = static_cast<int>(parse_int(key, value));
  } else if (key == "fault_flush_timeout_ms") {
    cfg.fault.flush_timeout = dur_from_ms(parse_double(key, value));
  } else if (key == "fault_mean_interarrival_s") {
    cfg.fault.mean_interarrival_s = parse_double(key, value);
  } else if (key == "fault_duration_s") {
    cfg.fault.duration = dur_from_s(parse_double(key, value));
  } else if (key == "fault_start_s") {
    cfg.fault.scheduled_start = Timestamp{dur_from_s(parse_double(key, value))};
  } else {
    throw std::invalid_argument("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected 'key = value'");
    apply_config_entry(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "policy = " << to_string(cfg.policy.kind) << "\n";
  out << "kappa = " << fmt_double(cfg.policy.kappa) << "\n";
  out << "epoch_multiplier = " << cfg.policy.epoch_multiplier << "\n";
  out << "clamp_hi = " << fmt_double(cfg.policy.clamp_hi) << "\n";
  out << "clamp_lo = " << fmt_double(cfg.policy.clamp_lo) << "\n";
  out << "ewma_alpha = " << fmt_double(cfg.policy.ewma_alpha) << "\n";
  out << "lambda_min = " << fmt_double(cfg.policy.lambda_min) << "\n";
  out << "lambda_max = " << fmt_double(cfg.policy.lambda_max) << "\n";
  out << "min_epoch_len_ms = " << fmt_double(to_ms(cfg.policy.min_epoch_len)) << "\n";
  out << "fixed_lambda = " << fmt_double(cfg.policy.fixed_lambda) << "\n";
  out << "feedback = " << (cfg.policy.feedback_enabled ? "on" : "off") << "\n";
  out << "peak_age_threshold_ms = " << fmt_double(to_ms(cfg.policy.peak_age_threshold))
      << "\n";
  out << "tie_zero_sign = " << (cfg.policy.tie_sign_positive ? "positive" : "negative")
      << "\n";
  out << "mdec_gamma_cap = " << cfg.policy.mdec_gamma_cap << "\n";
  out << "init_packets = " << cfg.policy.init_packets << "\n";
  out << "init_spacing_ms = " << fmt_double(to_ms(cfg.policy.init_spacing)) << "\n";
  out << "init_timeout_ms = " << fmt_double(to_ms(cfg.policy.init_timeout)) << "\n";
  out << "init_retries = " << cfg.policy.init_retries << "\n";
  out << "packets = " << cfg.packets << "\n";
  out << "runs = " << cfg.runs << "\n";
  out << "seeds = ";
  for (size_t i = 0; i < cfg.seeds.size(); ++i) out << (i ? "," : "") << cfg.seeds[i];
  out << "\n";
  out << "chan_base_owd_ms = " << fmt_double(to_ms(cfg.channel.base_one_way_delay)) << "\n";
  out << "chan_jitter = " << to_string(cfg.channel.jitter) << "\n";
  out << "chan_jitter_mean_ms = " << fmt_double(cfg.channel.jitter_mean_ms) << "\n";
  out << "chan_jitter_mu = " << fmt_double(cfg.channel.jitter_mu) << "\n";
  out << "chan_jitter_sigma = " << fmt_double(cfg.channel.jitter_sigma) << "\n";
  out << "chan_loss = " << fmt_double(cfg.channel.loss_prob) << "\n";
  out << "chan_service_ms = " << fmt_double(to_ms(cfg.channel.service_time)) << "\n";
  out << "fault_mode = " << to_string(cfg.fault.mode) << "\n";
  out << "fault_hold_count = " << cfg.fault.hold_count << "\n";
  out << "fault_flush_timeout_ms = " << fmt_double(to_ms(cfg.fault.flush_timeout)) << "\n";
  out << "fault_mean_interarrival_s = " << fmt_double(cfg.fault.mean_interarrival_s) << "\n";
  out << "fault_duration_s = " << fmt_double(to_s(cfg.fault.duration)) << "\n";
  out << "fault_start_s = " << fmt_double(to_s(cfg.fault.scheduled_start - Timestamp{}))
      << "\n";
  return out.str();
}

}  // namespace agectl
