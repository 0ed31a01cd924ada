// handpan: command-line entry point for the trainer.
//
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "handpan/analysis.hpp"
#include "handpan/chart.hpp"
#include "handpan/config.hpp"
#include "handpan/judge.hpp"
#include "handpan/layouts.hpp"
#include "handpan/net.hpp"
#include "handpan/sensor.hpp"
#include "handpan/sensor_link.hpp"
#include "handpan/service.hpp"
#include "handpan/session.hpp"

namespace {

using namespace handpan;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs `f`, reporting bad flag values as usage errors.
template <typename F>
auto flag_value(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidParams& e) {
    throw UsageError(e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw IoError("cannot write " + path);
}

// A chart file path, or the id of a bundled chart.
chart::Chart load_chart(const std::string& ref) {
  if (std::filesystem::exists(ref)) return chart::load_chart_file(ref);
  for (const auto& c : chart::builtin_charts()) {
    if (chart::chart_id(c) == ref) return c;
  }
  throw IoError("no chart file or bundled chart named '" + ref + "'");
}

struct Common {
  std::optional<std::string> config_file;
  std::optional<std::int64_t> window_ms;
};

config::Config load_settings(const Common& common) {
  config::Config cfg;
  if (const auto path = config::config_path(common.config_file)) {
    try {
      cfg = config::load_config(*path);
    } catch (const config::ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  if (common.window_ms) {
    cfg.window_ms = *common.window_ms;
  }
  flag_value([&] {
    config::validate_config(cfg);
    return 0;
  });
  return cfg;
}

layouts::LayoutGeometry layout_for(const config::Config& cfg, layouts::InterfaceKind kind, const chart::Chart& c) {
  layouts::HandpanParams hp;
  hp.palette = cfg.palette;
  layouts::LayoutParams lp;
  lp.scroll_speed_mps = cfg.scroll_speed_mps;
  lp.highway_length_m = cfg.highway_length_m;
  return layouts::build_layout(kind, layouts::handpan_model(hp), c, lp);
}

std::string plural(std::size_t n, const char* word) {
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

// ---------------------------------------------------------------------------

int cmd_chart_validate(const std::string& file) {
  try {
    const auto c = chart::parse_chart(read_file(file));
    std::cout << "valid: " << plural(c.note_count(), "note") << ", " << plural(c.patterns.size(), "pattern") << "\n";
    return 0;
  } catch (const chart::SemanticError& e) {
    for (const auto& v : e.violations()) std::cerr << v.describe() << "\n";
    std::cerr << "invalid: " << plural(e.violations().size(), "violation") << "\n";
    return 1;
  }
}

int cmd_chart_info(const std::string& file) {
  const auto c = load_chart(file);
  std::cout << plural(c.note_count(), "note") << ", " << plural(c.patterns.size(), "pattern") << "\n";
  return 0;
}

struct PlayArgs {
  std::string chart = "song_a";
  std::string interface = "StandardPath";
  std::string profile = "steady";
  std::uint64_t seed = 1;
};

int cmd_play(const PlayArgs& a, const config::Config& cfg) {
  const auto c = load_chart(a.chart);
  const auto kind = flag_value([&] { return layouts::parse_kind(a.interface); });
  const auto profile = flag_value([&] { return session::parse_player_profile(a.profile); });
  layout_for(cfg, kind, c);

  std::mt19937_64 rng(session::trial_seed(a.seed, 0, 0));
  const auto strikes = session::generate_strikes(c, profile, rng);
  const auto report = judge::judge_session(c, strikes, cfg.window_ms);
  const auto summary = judge::score_summary(report);

  session::TrialResult r;
  r.participant = "headless";
  r.interface = kind;
  r.song_id = chart::chart_id(c);
  r.score = report.score;
  r.max_score = report.max_score;
  r.window_ms = cfg.window_ms;
  r.timestamp = session::iso8601_utc(session::HeadlessOptions{}.origin);
  std::cout << session::format_results(std::span(&r, 1));
  std::cerr << "hits " << summary.hits << ", misses " << summary.misses << ", extraneous " << summary.extraneous
            << ", mean |delta| " << summary.mean_abs_delta_ms << " ms\n";
  return 0;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  std::uint16_t port = 7777;
  std::string chart = "song_a";
  std::string interface = "StandardPath";
  int sessions = 1;
  std::string out;
  double rate = 1.0;
};

int cmd_serve(const ServeArgs& a, const config::Config& cfg) {
  const auto c = load_chart(a.chart);
  const auto kind = flag_value([&] { return layouts::parse_kind(a.interface); });
  if (!(a.rate > 0.0)) throw UsageError("--rate must be positive");
  const auto layout = layout_for(cfg, kind, c);

  service::LiveOptions options;
  options.window_ms = cfg.window_ms;
  options.commit_grace_ms = cfg.commit_grace_ms;
  options.lead_in_ms = cfg.lead_in_ms;
  options.latency_compensation_ms = cfg.latency_compensation_ms;
  options.song_id = chart::chart_id(c);

  service::TcpListener listener(a.port, a.host);
  const service::ServerClock clock(a.rate);
  std::cerr << "listening on " << a.host << ":" << listener.port() << " (" << layouts::kind_name(kind) << ", "
            << options.song_id << ")" << std::endl;

  std::vector<session::TrialResult> results;
  for (int served = 0; a.sessions == 0 || served < a.sessions;) {
    auto connection = listener.accept(std::chrono::milliseconds(1000));
    if (!connection) continue;
    ++served;
    try {
      auto outcome = service::live_session(c, layout, options, *connection, clock);
      outcome.result.order_index = static_cast<int>(results.size());
      results.push_back(outcome.result);
      std::cout << session::format_results(std::span(&outcome.result, 1)).substr(session::kResultsHeader.size() + 1);
      std::cout.flush();
      if (!outcome.complete) std::cerr << "session incomplete: client disconnected\n";
      if (outcome.late_strikes > 0) std::cerr << outcome.late_strikes << " late strikes ignored\n";
      if (!a.out.empty()) session::write_results(a.out, results);
    } catch (const service::ProtocolViolation& e) {
      std::cerr << "protocol violation: " << e.what() << "\n";
    } catch (const service::ClientDisconnected& e) {
      std::cerr << "client disconnected: " << e.what() << "\n";
    }
    connection->close();
  }
  return 0;
}

struct DeviceArgs {
  std::string profile = "STILL";
  double rate = 50.0;
  std::int64_t duration_ms = 1000;
  std::uint64_t seed = 1;
  std::string out = "-";
  bool realtime = false;
};

int cmd_simulate_device(const DeviceArgs& a, const config::Config& cfg) {
  const auto profile = flag_value([&] { return sensor::parse_profile(a.profile); });
  if (!(a.rate > 0.0)) throw UsageError("--rate must be positive");
  if (a.duration_ms < 0) throw UsageError("--duration-ms must be non-negative");
  const auto frames = sensor::simulate_device(profile, a.duration_ms, a.rate, a.seed);

  std::optional<sensor::SerialPort> port;
  const bool to_stdout = a.out == "-";
  if (!to_stdout) {
    port.emplace(a.out, cfg.serial, sensor::SerialPort::Mode::Write);
  }
  const bool pace = a.realtime || (port && port->is_tty());
  if (port && port->is_tty() && !frames.empty()) {
    const std::size_t bytes = sensor::encode_frame(frames.front()).size();
    if (!sensor::fits_link(cfg.serial, bytes, a.rate)) {
      std::cerr << "warning: " << a.rate << " Hz of " << bytes << "-byte frames exceeds " << cfg.serial.baud << " "
                << sensor::framing_name(cfg.serial) << " (max " << sensor::max_frame_rate_hz(cfg.serial, bytes)
                << " Hz)\n";
    }
  }

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (pace) {
      std::this_thread::sleep_until(start + std::chrono::duration<double, std::milli>(1000.0 * i / a.rate));
    }
    const std::string line = sensor::encode_frame(frames[i]);
    if (port) {
      port->write(line);
    } else {
      std::cout << line;
    }
  }
  std::cout.flush();
  std::cerr << frames.size() << " frames\n";
  return 0;
}

int cmd_latin_square(int k, bool odd) {
  session::OrderMatrix square;
  try {
    square = flag_value([&] { return odd ? session::balanced_latin_square_odd(k) : session::balanced_latin_square(k); });
  } catch (const session::OddOrderUnsupported&) {
    throw UsageError("odd k needs --odd (2k rows)");
  }
  for (const auto& row : square) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::cout << (i ? " " : "") << row[i];
    }
    std::cout << "\n";
  }
  return 0;
}

struct StudyArgs {
  int participants = 6;
  std::uint64_t seed = 1;
  std::string profile = "steady";
  std::string out = "-";
  std::string plan_out;
};

int cmd_study(const StudyArgs& a, const config::Config& cfg) {
  if (a.participants <= 0) throw UsageError("--participants must be positive");
  const auto profile = flag_value([&] { return session::parse_player_profile(a.profile); });
  std::vector<std::string> ids;
  for (int i = 1; i <= a.participants; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "P%02d", i);
    ids.emplace_back(id);
  }
  const std::vector<std::string> songs = {"song_a", "song_b"};
  const auto plan = session::plan_session(ids, layouts::kAllInterfaces, songs);
  if (!a.plan_out.empty()) write_text(a.plan_out, session::serialize_plan(plan));

  const auto charts = chart::builtin_charts();
  const auto results = session::run_headless(plan, charts, profile, cfg.window_ms, a.seed);
  write_text(a.out, session::format_results(results));
  return 0;
}

struct AnalyzeArgs {
  std::string csv;
  std::string agg = "sum";
  std::string plot_data;
  double alpha = 0.05;
};

int cmd_analyze(const AnalyzeArgs& a) {
  const auto agg = flag_value([&] { return stats::parse_aggregation(a.agg); });
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  const auto results = session::read_results(a.csv);
  const auto analysis = stats::analyze(results, agg, a.alpha);
  std::cout << analysis.report;
  if (!a.plot_data.empty()) write_text(a.plot_data, analysis.plot_data);
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Handpan rhythm-game trainer: charts, judging, layouts, device simulation, sessions, analysis"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_file, "key = value config file (default: $HANDPAN_CONFIG)");

  auto* chart_cmd = app.add_subcommand("chart", "Chart tooling");
  chart_cmd->require_subcommand(1);
  std::string chart_file;
  auto* validate = chart_cmd->add_subcommand("validate", "Parse and validate a chart file");
  validate->add_option("file", chart_file)->required();
  auto* info = chart_cmd->add_subcommand("info", "Print note and pattern counts");
  info->add_option("file", chart_file, "chart file or bundled id")->required();
  std::string export_id;
  std::string export_out = "-";
  auto* exp = chart_cmd->add_subcommand("export", "Write a bundled chart document");
  exp->add_option("id", export_id, "song_a, song_b or scale_warmup")->required();
  exp->add_option("--out", export_out);

  PlayArgs play;
  auto* play_cmd = app.add_subcommand("play", "Headless trial with a simulated player");
  play_cmd->add_option("--chart", play.chart, "chart file or bundled id");
  play_cmd->add_option("--interface", play.interface);
  play_cmd->add_option("--profile", play.profile, "perfect|steady|novice|absent or p=,sigma=,bias=,wrong=");
  play_cmd->add_option("--seed", play.seed);
  play_cmd->add_option("--window", common.window_ms, "hit window in ms");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve live sessions over TCP lines or WebSocket");
  serve_cmd->add_option("--host", serve.host);
  serve_cmd->add_option("--port", serve.port);
  serve_cmd->add_option("--chart", serve.chart, "chart file or bundled id");
  serve_cmd->add_option("--interface", serve.interface);
  serve_cmd->add_option("--sessions", serve.sessions, "sessions to serve before exiting (0 = unlimited)");
  serve_cmd->add_option("--out", serve.out, "results CSV");
  serve_cmd->add_option("--rate", serve.rate, "server clock rate")->group("");
  serve_cmd->add_option("--window", common.window_ms, "hit window in ms");

  DeviceArgs device;
  auto* device_cmd = app.add_subcommand("simulate-device", "Emit simulated orientation frames");
  device_cmd->add_option("--profile", device.profile, "STILL, SLOW_TILT or DRIFTY");
  device_cmd->add_option("--rate", device.rate, "frames per second");
  device_cmd->add_option("--duration-ms", device.duration_ms);
  device_cmd->add_option("--seed", device.seed);
  device_cmd->add_option("--out", device.out, "file or serial device ('-' for stdout)");
  device_cmd->add_flag("--realtime", device.realtime, "pace frames to the wall clock");

  int k = 0;
  bool odd = false;
  auto* latin_cmd = app.add_subcommand("latin-square", "Print a balanced Latin square");
  latin_cmd->add_option("--k", k)->required();
  latin_cmd->add_flag("--odd", odd, "odd-k variant (2k rows)");

  StudyArgs study;
  auto* study_cmd = app.add_subcommand("study", "Full headless study (6 interfaces x 2 songs) to CSV");
  study_cmd->add_option("--participants", study.participants);
  study_cmd->add_option("--seed", study.seed);
  study_cmd->add_option("--profile", study.profile);
  study_cmd->add_option("--out", study.out, "results CSV ('-' for stdout)");
  study_cmd->add_option("--plan-out", study.plan_out, "write the counterbalanced order");
  study_cmd->add_option("--window", common.window_ms, "hit window in ms");

  AnalyzeArgs analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Repeated-measures ANOVA and post-hoc report");
  analyze_cmd->add_option("csv", analyze.csv)->required();
  analyze_cmd->add_option("--agg", analyze.agg, "sum, mean or per-song");
  analyze_cmd->add_option("--plot-data", analyze.plot_data, "write interface,n,mean,sd");
  analyze_cmd->add_option("--alpha", analyze.alpha);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*chart_cmd) {
    if (*validate) return cmd_chart_validate(chart_file);
    if (*info) return cmd_chart_info(chart_file);
    write_text(export_out, chart::bundled_chart_document(export_id));
    return 0;
  }
  if (*latin_cmd) return cmd_latin_square(k, odd);
  if (*analyze_cmd) return cmd_analyze(analyze);

  const auto cfg = load_settings(common);
  if (*play_cmd) return cmd_play(play, cfg);
  if (*serve_cmd) return cmd_serve(serve, cfg);
  if (*device_cmd) return cmd_simulate_device(device, cfg);
  return cmd_study(study, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
