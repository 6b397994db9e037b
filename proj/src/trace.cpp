#include "agectl/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace agectl {

namespace {

constexpr const char* kMagicLine = "# agectl-trace v1";
constexpr const char* kColumns =
    "run_id,policy,k,t_start_ns,t_end_ns,avg_age_ns,peak_age_ns,avg_backlog,lambda,"
    "epoch_len_ns,action,rtt_bar_ns,z_bar_ns,clamped,zeta";

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string serialize_trace(const ExperimentConfig& cfg, std::uint64_t seed,
                            const std::vector<EpochStats>& rows) {
  std::ostringstream out;
  out << kMagicLine << "\n";
  out << "# seed = " << seed << "\n";
  out << "# run_id = " << seed << "\n";
  std::istringstream cfg_lines(serialize_config(cfg));
  std::string line;
  while (std::getline(cfg_lines, line)) out << "# " << line << "\n";
  out << kColumns << "\n";
  for (const auto& r : rows) {
    out << seed << ',' << to_string(cfg.policy.kind) << ',' << r.k << ','
        << r.t_start.ns << ',' << r.t_end.ns << ',' << fmt_double(r.avg_age_ns) << ','
        << r.peak_age << ',' << fmt_double(r.avg_backlog) << ',' << fmt_double(r.lambda)
        << ',' << r.epoch_len << ',' << (r.action ? to_string(*r.action) : "-") << ','
        << fmt_double(r.rtt_bar_ns) << ',' << fmt_double(r.z_bar_ns) << ','
        << (r.clamped ? 1 : 0) << ',' << r.zeta << "\n";
  }
  return out.str();
}

void write_trace_file(const std::string& path, const ExperimentConfig& cfg,
                      std::uint64_t seed, const std::vector<EpochStats>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << serialize_trace(cfg, seed, rows);
}

TraceFile parse_trace(const std::string& text) {
  TraceFile tf;
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kMagicLine)
    throw std::runtime_error("not an agectl trace (missing magic header)");

  bool saw_columns = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      std::string key = line.substr(1, eq - 1);
      std::string value = line.substr(eq + 1);
      const auto strip = [](std::string& s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.erase(s.begin());
        while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
      };
      strip(key);
      strip(value);
      if (key == "seed") {
        tf.seed = std::stoull(value);
      } else if (key == "run_id") {
        tf.run_id = std::stoull(value);
      } else {
        apply_config_entry(tf.config, key, value);
      }
      continue;
    }
    if (!saw_columns) {
      if (line != kColumns) {
        // name the first offending column for the error
        const auto got = split_csv(line);
        const auto want = split_csv(kColumns);
        for (size_t i = 0; i < want.size(); ++i) {
          if (i >= got.size() || got[i] != want[i])
            throw std::runtime_error("trace schema mismatch at column '" + want[i] + "'");
        }
        throw std::runtime_error("trace schema mismatch: unexpected extra columns");
      }
      saw_columns = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 15)
      throw std::runtime_error("trace row has " + std::to_string(f.size()) +
                               " fields, expected 15");
    TraceRow row;
    row.run_id = std::stoull(f[0]);
    const auto kind = policy_kind_from_string(f[1]);
    if (!kind) throw std::runtime_error("trace row has unknown policy '" + f[1] + "'");
    row.policy = *kind;
    row.stats.k = std::stoull(f[2]);
    row.stats.t_start = Timestamp{std::stoll(f[3])};
    row.stats.t_end = Timestamp{std::stoll(f[4])};
    row.stats.avg_age_ns = std::stod(f[5]);
    row.stats.peak_age = std::stoll(f[6]);
    row.stats.avg_backlog = std::stod(f[7]);
    row.stats.lambda = std::stod(f[8]);
    row.stats.epoch_len = std::stoll(f[9]);
    if (f[10] != "-") {
      const auto act = action_from_string(f[10]);
      if (!act) throw std::runtime_error("trace row has unknown action '" + f[10] + "'");
      row.stats.action = act;
    }
    row.stats.rtt_bar_ns = std::stod(f[11]);
    row.stats.z_bar_ns = std::stod(f[12]);
    row.stats.clamped = f[13] == "1";
    row.stats.zeta = static_cast<std::uint32_t>(std::stoul(f[14]));
    tf.rows.push_back(row);
  }
  if (!saw_columns) throw std::runtime_error("trace has no column header row");
  return tf;
}

TraceFile load_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_trace(buf.str());
}

}  // namespace agectl
