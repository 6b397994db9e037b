#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "agectl/harness.hpp"
#include "agectl/netsim.hpp"
#include "agectl/stats.hpp"
#include "agectl/trace.hpp"
#include "agectl/udp_runner.hpp"

namespace fs = std::filesystem;
using namespace agectl;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

ExperimentConfig load_or_default(const std::string& path) {
  if (path.empty()) return ExperimentConfig{};
  return load_config_file(path);
}

void write_packet_log(const std::string& path, const SimResult& res) {
  std::ofstream out(path, std::ios::binary);
  out << "seq,send_ns,monitor_recv_ns,ack_recv_ns,fwd_lost,ack_lost\n";
  for (const auto& p : res.packets) {
    out << p.seq << ',' << p.send_time.ns << ',';
    if (p.monitor_recv) out << p.monitor_recv->ns;
    else out << '-';
    out << ',';
    if (p.ack_recv) out << p.ack_recv->ns;
    else out << '-';
    out << ',' << (p.fwd_lost ? 1 : 0) << ',' << (p.ack_lost ? 1 : 0) << "\n";
  }
}

void print_run_line(const SimResult& res) {
  std::printf("seed %llu: %zu epochs, weighted mean age %.3f ms, clamp %.1f%%, "
              "sent %llu delivered %llu lost %llu\n",
              static_cast<unsigned long long>(res.seed), res.epochs.size(),
              res.agg.weighted_mean_age_ns / 1e6, res.agg.clamp_fraction * 100.0,
              static_cast<unsigned long long>(res.agg.sent),
              static_cast<unsigned long long>(res.agg.delivered),
              static_cast<unsigned long long>(res.agg.fwd_lost));
}

int cmd_simulate(const std::string& config_path, std::int64_t seed_opt,
                 const std::string& out_dir, bool packet_log) {
  ExperimentConfig cfg = load_config_file(config_path);
  fs::create_directories(out_dir);
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seed_opt >= 0) seeds = {static_cast<std::uint64_t>(seed_opt)};
  for (const auto seed : seeds) {
    const SimResult res = run_simulation(cfg, seed);
    const fs::path trace = fs::path(out_dir) / ("trace_seed" + std::to_string(seed) + ".csv");
    write_trace_file(trace.string(), res.config, seed, res.epochs);
    if (packet_log)
      write_packet_log((fs::path(out_dir) / ("packets_seed" + std::to_string(seed) + ".csv"))
                           .string(),
                       res);
    print_run_line(res);
  }
  return 0;
}

int cmd_sweep_kappa(const std::string& config_path, const std::vector<double>& values,
                    int runs, const std::string& out_dir) {
  ExperimentConfig base = load_or_default(config_path);
  if (runs > 0) {
    base.runs = runs;
    base.seeds.clear();
    for (int i = 1; i <= runs; ++i) base.seeds.push_back(static_cast<std::uint64_t>(i));
  }
  const auto& kappas = values.empty() ? default_kappa_sweep() : values;
  const auto outcomes = run_matrix(make_kappa_sweep(base, kappas), out_dir);
  std::vector<std::pair<double, double>> sweep_points;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    sweep_points.emplace_back(kappas[i], outcomes[i].summary.weighted_mean_age_ns / 1e6);
    std::printf("%-18s weighted mean age %.3f ms (median %.3f ms)\n",
                outcomes[i].name.c_str(), outcomes[i].summary.weighted_mean_age_ns / 1e6,
                outcomes[i].summary.median_age_ns / 1e6);
  }
  const std::string path = emit_sweep_plot(sweep_points, out_dir, "kappa");
  std::printf("sweep plot data: %s\n", path.c_str());
  return 0;
}

int cmd_compare_acpplus(const std::string& config_path, const std::vector<int>& multipliers,
                        const std::string& out_dir) {
  ExperimentConfig base = load_or_default(config_path);
  const auto outcomes = run_matrix(make_acpplus_grid(base, multipliers), out_dir);
  std::printf("%-18s %16s %16s %16s\n", "cell", "mean(ms)", "median(ms)", "variance(ms^2)");
  for (const auto& o : outcomes)
    std::printf("%-18s %16.3f %16.3f %16.3f\n", o.name.c_str(),
                o.summary.weighted_mean_age_ns / 1e6, o.summary.median_age_ns / 1e6,
                o.summary.variance_age_ns2 / 1e12);
  return 0;
}

int cmd_feedback_test(const std::string& config_path, double threshold_ms,
                      const std::string& out_dir) {
  ExperimentConfig base = load_or_default(config_path);
  if (config_path.empty()) {
    // stock scenario: mid-run receiver stall under an ACP sender
    base.policy.kind = PolicyKind::Acp;
    base.policy.kappa = 0.5;
    base.fault.mode = FaultMode::Scheduled;
    base.fault.scheduled_start = Timestamp{dur_s(20)};
    base.fault.duration = dur_s(10);
  }
  base.policy.peak_age_threshold = dur_from_ms(threshold_ms);
  const auto outcomes = run_matrix(make_feedback_cells(base), out_dir);
  for (const auto& o : outcomes) {
    std::printf("%s:\n", o.name.c_str());
    for (const auto& run : o.runs) {
      if (!run.ok) {
        std::printf("  seed %llu failed: %s\n",
                    static_cast<unsigned long long>(run.seed), run.error.c_str());
        continue;
      }
      if (run.agg.time_to_recovery_epochs)
        std::printf("  seed %llu: recovery after %lld post-fault epoch(s)\n",
                    static_cast<unsigned long long>(run.seed),
                    static_cast<long long>(*run.agg.time_to_recovery_epochs));
      else
        std::printf("  seed %llu: did not recover within the run\n",
                    static_cast<unsigned long long>(run.seed));
    }
  }
  return 0;
}

int cmd_analyze(const std::vector<std::string>& traces, const std::string& report_dir) {
  fs::create_directories(report_dir);
  std::vector<TraceRow> rows;
  Duration threshold = dur_ms(200);
  for (const auto& path : traces) {
    const TraceFile tf = load_trace_file(path);
    threshold = tf.config.policy.peak_age_threshold;
    rows.insert(rows.end(), tf.rows.begin(), tf.rows.end());
  }
  const SummaryStats s = summarize_rows(rows, threshold);
  const fs::path summary_path = fs::path(report_dir) / "summary.txt";
  std::ofstream out(summary_path, std::ios::binary);
  out << serialize_summary(s, "analyze");
  emit_plot_data(s, rows, PlotKind::Cdf, report_dir, "analyze");
  emit_plot_data(s, rows, PlotKind::Trace, report_dir, "analyze");
  std::printf("%s", serialize_summary(s, "analyze").c_str());
  std::printf("report written to %s\n", report_dir.c_str());
  return 0;
}

int cmd_udp_echo(const std::string& bind_addr) {
  EchoServer server(bind_addr);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::printf("echo server listening on %s (port %u)\n", bind_addr.c_str(), server.port());
  server.run(&g_stop);
  std::printf("received %llu, echoed %llu, dropped %llu malformed\n",
              static_cast<unsigned long long>(server.received()),
              static_cast<unsigned long long>(server.echoed()),
              static_cast<unsigned long long>(server.dropped_malformed()));
  return 0;
}

int cmd_udp_send(const std::string& peer, const std::string& policy_name,
                 std::uint64_t packets, const std::string& config_path,
                 const std::string& out_path) {
  ExperimentConfig cfg = load_or_default(config_path);
  if (!policy_name.empty()) {
    const auto kind = policy_kind_from_string(policy_name);
    if (!kind) {
      std::fprintf(stderr, "unknown policy '%s'\n", policy_name.c_str());
      return 2;
    }
    cfg.policy.kind = *kind;
  }
  SenderOptions opts;
  opts.peer = peer;
  opts.policy = cfg.policy;
  opts.packets = packets;
  const SenderResult res = run_sender(opts);
  if (!out_path.empty()) {
    cfg.packets = packets;
    write_trace_file(out_path, cfg, 0, res.epochs);
    std::printf("trace written to %s\n", out_path.c_str());
  }
  std::printf("sent %llu, acked %llu, duplicates %llu, unacked %llu, "
              "min rtt %.3f ms, session %.3f s\n",
              static_cast<unsigned long long>(res.sent),
              static_cast<unsigned long long>(res.acked_unique),
              static_cast<unsigned long long>(res.duplicate_acks),
              static_cast<unsigned long long>(res.unacked), to_ms(res.min_rtt),
              to_s(res.session_len));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agectl: freshness-aware rate control over simulated and real datagrams"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", bind_addr, peer, policy_name, out_path;
  std::int64_t seed = -1;
  bool packet_log = false;
  std::vector<double> kappa_values;
  std::vector<int> multipliers = {10, 30};
  int runs = 0;
  double threshold_ms = 200.0;
  std::uint64_t packets = 1000;
  std::vector<std::string> traces;

  auto* sim = app.add_subcommand("simulate", "run seeded simulations from a config file");
  sim->add_option("--config", config_path, "config file")->required();
  sim->add_option("--seed", seed, "override: run only this seed");
  sim->add_option("--out", out_dir, "output directory");
  sim->add_flag("--packet-log", packet_log, "also write per-packet logs");

  auto* sweep = app.add_subcommand("sweep-kappa", "ACP step-size sweep");
  sweep->add_option("--config", config_path, "base config file");
  sweep->add_option("--values", kappa_values, "kappa values")->delimiter(',');
  sweep->add_option("--runs", runs, "runs per cell (seeds 1..N)");
  sweep->add_option("--out", out_dir, "output directory");

  auto* cmp = app.add_subcommand("compare-acpplus",
                                 "original vs modified ACP+ across epoch multipliers");
  cmp->add_option("--config", config_path, "base config file");
  cmp->add_option("--epochs", multipliers, "epoch multipliers")->delimiter(',');
  cmp->add_option("--out", out_dir, "output directory");

  auto* fb = app.add_subcommand("feedback-test",
                                "coalescing-fault episode with feedback off vs on");
  fb->add_option("--config", config_path, "base config file");
  fb->add_option("--threshold-ms", threshold_ms, "peak age threshold");
  fb->add_option("--out", out_dir, "output directory");

  auto* an = app.add_subcommand("analyze", "summarize trace files and emit plot data");
  an->add_option("traces", traces, "trace files")->required()->expected(-1);
  an->add_option("--report", out_dir, "report directory");

  auto* echo = app.add_subcommand("udp-echo", "run the datagram echo server");
  echo->add_option("--bind", bind_addr, "bind address HOST:PORT")->required();

  auto* send = app.add_subcommand("udp-send", "drive a policy against an echo peer");
  send->add_option("--peer", peer, "echo server HOST:PORT")->required();
  send->add_option("--policy", policy_name, "fixed|lazy|acp|acp+|acp+mod");
  send->add_option("--packets", packets, "packet budget");
  send->add_option("--config", config_path, "config file");
  send->add_option("--out", out_path, "trace output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, seed, out_dir, packet_log);
    if (sweep->parsed()) return cmd_sweep_kappa(config_path, kappa_values, runs, out_dir);
    if (cmp->parsed()) return cmd_compare_acpplus(config_path, multipliers, out_dir);
    if (fb->parsed()) return cmd_feedback_test(config_path, threshold_ms, out_dir);
    if (an->parsed()) return cmd_analyze(traces, out_dir);
    if (echo->parsed()) return cmd_udp_echo(bind_addr);
    if (send->parsed()) return cmd_udp_send(peer, policy_name, packets, config_path, out_path);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
