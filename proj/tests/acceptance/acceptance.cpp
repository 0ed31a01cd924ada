// Acceptance suite: one PASS/FAIL line per primary criterion.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "handpan/analysis.hpp"
#include "handpan/chart.hpp"
#include "handpan/judge.hpp"
#include "handpan/layouts.hpp"
#include "handpan/net.hpp"
#include "handpan/sensor.hpp"
#include "handpan/service.hpp"
#include "handpan/session.hpp"
#include "handpan/stats.hpp"
#include "oracles.hpp"

using namespace handpan;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0 && secs > budget_s) {
    v.pass = false;
    v.detail += "; over time budget";
  }
  if (!v.pass) ++failures;
  std::ostringstream line;
  line.precision(3);
  line << (v.pass ? "PASS " : "FAIL ") << name << " (" << v.detail << "; " << std::fixed << secs << " s)";
  std::cout << line.str() << std::endl;
}

std::string str(double x) {
  std::ostringstream s;
  s.precision(12);
  s << x;
  return s.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::pair<int, std::string> run_cli(const std::string& args) {
  const std::string cmd = std::string("'") + HANDPAN_CLI + "' " + args + " 2>&1";
  std::string out;
  FILE* p = ::popen(cmd.c_str(), "r");
  if (p == nullptr) return {-1, ""};
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), n);
  const int status = ::pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

// Frame on the four-decimal grid so the codec round trip is exact.
sensor::OrientationFrame grid_frame(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> accel(-200000, 200000);
  std::uniform_int_distribution<int> cal(0, 3);
  const auto grid = [](double v) { return std::round(v * 10000.0) / 10000.0; };
  double q[4] = {g(rng), g(rng), g(rng), g(rng)};
  const double n = std::sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
  sensor::OrientationFrame f;
  f.seq = static_cast<std::uint32_t>(rng());
  f.q = {grid(q[0] / n), grid(q[1] / n), grid(q[2] / n), grid(q[3] / n)};
  f.accel = {accel(rng) / 10000.0, accel(rng) / 10000.0, accel(rng) / 10000.0};
  f.cal = {cal(rng), cal(rng), cal(rng), cal(rng)};
  return f;
}

Verdict charts() {
  const std::filesystem::path dir = HANDPAN_DATA_DIR;
  const auto a = chart::load_chart_file(dir / "song_a.chart");
  const auto b = chart::load_chart_file(dir / "song_b.chart");
  std::vector<std::size_t> sa;
  std::vector<std::size_t> sb;
  for (const auto& p : a.patterns) sa.push_back(p.notes.size());
  for (const auto& p : b.patterns) sb.push_back(p.notes.size());
  const bool ok = a.note_count() == 80 && sa == std::vector<std::size_t>(10, 8) && b.note_count() == 49 &&
                  sb == std::vector<std::size_t>{12, 12, 12, 12, 1};
  return {ok, "song_a " + std::to_string(a.note_count()) + " notes/" + std::to_string(sa.size()) + " patterns, song_b " +
                  std::to_string(b.note_count()) + " notes/" + std::to_string(sb.size()) + " patterns"};
}

Verdict judge_oracle() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<std::int64_t> window(1, 500);
  int agree = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = oracle::random_chart(rng, 3, 4, 300);
    const auto s = oracle::random_strikes(c, rng, 12, 600);
    const auto w = window(rng);
    if (judge::judge_session(c, s, w).score == oracle::max_score(c, s, w)) ++agree;
  }
  return {agree == 1000, std::to_string(agree) + "/1000 instances agree with exhaustive matching"};
}

Verdict judge_invariances() {
  std::mt19937_64 rng(1002);
  std::uniform_int_distribution<std::int64_t> window(1, 400);
  int order_ok = 0;
  int mono_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto c = oracle::random_chart(rng, 3, 4, 300);
    auto s = oracle::random_strikes(c, rng, 12, 600);
    const auto w = window(rng);
    const int base = judge::judge_session(c, s, w).score;
    std::shuffle(s.begin(), s.end(), rng);
    if (judge::judge_session(c, s, w).score == base) ++order_ok;
    if (judge::judge_session(c, s, w + window(rng)).score >= base) ++mono_ok;
  }
  return {order_ok == 1000 && mono_ok == 1000,
          "order invariance " + std::to_string(order_ok) + "/1000, window monotonicity " + std::to_string(mono_ok) + "/1000"};
}

Verdict layout_arrival() {
  const std::array<layouts::InterfaceKind, 5> guided = {
      layouts::InterfaceKind::StandardPath, layouts::InterfaceKind::HighlightedDimple,
      layouts::InterfaceKind::FourSplitPath, layouts::InterfaceKind::DirectCurvedPath,
      layouts::InterfaceKind::SemicircularTwoSplitPath};
  const auto model = layouts::handpan_model();
  double worst_path = 0.0;
  double worst_ring = 0.0;
  std::size_t checked = 0;
  for (const auto* id : {"song_a", "song_b"}) {
    const auto c = chart::builtin_chart(id);
    for (auto kind : guided) {
      for (double speed : {0.3, 0.6, 1.2}) {
        layouts::LayoutParams p;
        p.scroll_speed_mps = speed;
        const auto layout = layouts::build_layout(kind, model, c, p);
        for (const auto& n : c.notes()) {
          const auto& path = layout.note_paths[static_cast<std::size_t>(n.id)];
          const auto at = layouts::note_position(layout, n, static_cast<double>(n.onset_ms));
          worst_path = std::max(worst_path, at ? distance(*at, path.endpoint()) : INFINITY);
          if (kind == layouts::InterfaceKind::HighlightedDimple) {
            const auto r = layouts::highlight_state(model, n, static_cast<double>(n.onset_ms), layout.travel_time_ms);
            worst_ring = std::max(worst_ring, std::abs(r.outer_radius_m - r.inner_radius_m));
          }
          ++checked;
        }
      }
    }
  }
  return {worst_path <= 1e-9 && worst_ring <= 1e-9,
          std::to_string(checked) + " arrivals, max endpoint error " + str(worst_path) + " m, max ring gap " +
              str(worst_ring) + " m"};
}

Verdict sensor_codec() {
  std::mt19937_64 rng(1005);
  int round_trips = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto f = grid_frame(rng);
    if (sensor::decode_frame(sensor::encode_frame(f)) == f) ++round_trips;
  }

  std::size_t corruptions = 0;
  std::size_t detected = 0;
  for (int i = 0; i < 100; ++i) {
    const std::string line = sensor::encode_frame(grid_frame(rng));
    for (std::size_t pos = 0; pos < line.size(); ++pos) {
      for (int v = 0; v < 256; ++v) {
        if (static_cast<char>(v) == line[pos]) continue;
        // A CR in place of the final LF still ends the line; the frame is unchanged.
        if (pos + 1 == line.size() && v == '\r') continue;
        std::string bad = line;
        bad[pos] = static_cast<char>(v);
        ++corruptions;
        try {
          sensor::decode_frame(bad);
        } catch (const sensor::DecodeError&) {
          ++detected;
        }
      }
    }
  }

  const auto model = layouts::handpan_model();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    auto f = grid_frame(rng);
    f.cal.system = 3;
    const auto posed = sensor::apply_pose(model, f);
    for (std::size_t a = 0; a < 8; ++a) {
      for (std::size_t b = a + 1; b < 8; ++b) {
        worst = std::max(worst, std::abs(distance(posed.centers[a], posed.centers[b]) -
                                          distance(model.dimples[a].center, model.dimples[b].center)));
      }
    }
  }

  const auto still = sensor::simulate_device(sensor::MotionProfile::Still, 1000, 50.0, 1);
  const bool ok = round_trips == 10000 && detected == corruptions && worst <= 1e-9 && still.size() == 50;
  return {ok, "round trips " + std::to_string(round_trips) + "/10000, corruption detected " + std::to_string(detected) +
                  "/" + std::to_string(corruptions) + ", pose distance error " + str(worst) + " m, STILL frames " +
                  std::to_string(still.size())};
}

Verdict latin_square() {
  const auto sq = session::balanced_latin_square(6);
  const bool latin = oracle::is_latin(sq, 6);
  const auto adj = oracle::adjacency_counts(sq);
  bool once = adj.size() == 30;
  for (const auto& [pair, count] : adj) once = once && count == 1 && pair.first != pair.second;
  return {latin && once, std::string("rows/columns ") + (latin ? "ok" : "bad") + ", " + std::to_string(adj.size()) +
                             " ordered adjacent pairs each " + (once ? "exactly once" : "NOT once")};
}

Verdict stats_oracle() {
  const std::vector<std::vector<double>> fixture = {{1, 2}, {2, 4}, {3, 6}};
  const auto o = oracle::sums_of_squares(fixture);
  const bool oracle_ok = std::abs(o.cond - 6) <= 1e-12 && std::abs(o.subj - 9) <= 1e-12 && std::abs(o.err - 1) <= 1e-12;

  stats::ScoreTable t;
  t.subjects = {"S1", "S2", "S3"};
  t.conditions = {"A", "B"};
  t.values = fixture;
  const auto r = stats::rm_anova(t);
  const bool ss_ok = std::abs(r.ss_cond - 6) <= 1e-9 && std::abs(r.ss_subj - 9) <= 1e-9 && std::abs(r.ss_err - 1) <= 1e-9;
  const bool f_ok = r.df1 == 1 && r.df2 == 2 && std::abs(r.f - 12.0) <= 1e-9;
  const bool eta_ok = std::abs(r.eta_g - 0.375) <= 1e-9;

  const double tail = stats::f_upper_tail(2.485, 5, 35);
  const bool tail_ok = std::abs(tail - 0.05) <= 5e-3;

  const std::vector<double> ps = {0.0, 0.001, 0.004, 0.05, 0.0666, 0.2, 1.0};
  const auto adj = stats::bonferroni(ps, 15);
  bool bonf_ok = adj.size() == ps.size();
  for (std::size_t i = 0; bonf_ok && i < ps.size(); ++i) bonf_ok = adj[i] == std::min(1.0, 15.0 * ps[i]);

  return {oracle_ok && ss_ok && f_ok && eta_ok && tail_ok && bonf_ok,
          "oracle ss (" + str(o.cond) + ", " + str(o.subj) + ", " + str(o.err) + "), engine ss (" + str(r.ss_cond) +
              ", " + str(r.ss_subj) + ", " + str(r.ss_err) + "), F(" + std::to_string(r.df1) + "," +
              std::to_string(r.df2) + ") = " + str(r.f) + ", eta_G = " + str(r.eta_g) + ", P(F(5,35) > 2.485) = " +
              str(tail) + ", Bonferroni " + (bonf_ok ? "exact" : "mismatch")};
}

Verdict headless_study() {
  const auto dir = std::filesystem::temp_directory_path();
  const auto csv = dir / "handpan_acceptance_study.csv";
  const std::string study = "study --participants 6 --seed 2024 --profile p=1,sigma=60 --window 150 --out '" +
                            csv.string() + "'";
  const std::string analyze = "analyze '" + csv.string() + "'";

  const auto s1 = run_cli(study);
  const std::string csv1 = slurp(csv);
  const auto a1 = run_cli(analyze);
  const auto s2 = run_cli(study);
  const std::string csv2 = slurp(csv);
  const auto a2 = run_cli(analyze);

  const auto trials = session::read_results(csv);
  const auto table = stats::interface_table(trials, stats::Aggregation::Sum);
  const auto ss = oracle::sums_of_squares(table.values);
  const auto r = stats::rm_anova(table);
  const double rel = std::abs(r.ss_cond + r.ss_subj + r.ss_err - ss.total) / std::max(1.0, ss.total);
  std::filesystem::remove(csv);

  const bool clean = s1.first == 0 && a1.first == 0 && s2.first == 0 && a2.first == 0 &&
                     a1.second.find("decomposition check: ok") != std::string::npos;
  const bool identical = a1.second == a2.second && csv1 == csv2;
  return {clean && identical && rel <= 1e-9 && trials.size() == 72,
          std::to_string(trials.size()) + " trials, exit codes " + std::to_string(s1.first) + "/" +
              std::to_string(a1.first) + ", decomposition relative error " + str(rel) + ", repeat run " +
              (identical ? "byte-identical" : "DIFFERS")};
}

Verdict live_batch() {
  const auto c = chart::builtin_chart("song_a");
  const auto layout = layouts::build_layout(layouts::InterfaceKind::StandardPath, layouts::handpan_model(), c, {});

  struct RunResult {
    int live = -1;
    int batch = -2;
    std::size_t logged = 0;
    std::int64_t late = 0;
  };
  const auto one = [&](int i) {
    std::mt19937_64 rng(5000 + static_cast<std::uint64_t>(i));
    session::PlayerProfile profile;
    profile.hit_prob = 0.85;
    profile.jitter_sd_ms = 20.0 + 10.0 * i;
    profile.bias_ms = static_cast<double>(i % 5) * 10.0 - 20.0;
    profile.wrong_dimple_prob = 0.05;
    auto strikes = session::generate_strikes(c, profile, rng);
    const auto extra = oracle::random_strikes(c, rng, 2, 300);
    strikes.insert(strikes.end(), extra.begin(), extra.end());

    service::TcpListener listener(0);
    const service::ServerClock clock(20.0);
    service::LiveOptions options;
    options.commit_grace_ms = 2000;
    auto server = std::async(std::launch::async, [&] {
      auto conn = listener.accept(std::chrono::seconds(30));
      if (!conn) throw IoError("no client");
      return service::live_session(c, layout, options, *conn, clock);
    });
    auto conn = i % 2 == 0 ? service::connect_websocket("127.0.0.1", listener.port())
                           : service::connect_tcp("127.0.0.1", listener.port());
    service::ScriptedClientOptions co;
    co.name = "run" + std::to_string(i);
    co.strikes = strikes;
    const auto client = service::run_scripted_client(*conn, clock.shifted(1000 * i - 7000), co);
    const auto outcome = server.get();
    RunResult r;
    r.live = client.saw_end ? client.final_hits : -1;
    r.batch = judge::judge_session(c, outcome.strike_log, options.window_ms).score;
    r.logged = outcome.strike_log.size();
    r.late = outcome.late_strikes;
    return r;
  };

  std::vector<std::future<RunResult>> runs;
  for (int i = 0; i < 20; ++i) runs.push_back(std::async(std::launch::async, one, i));
  int equal = 0;
  std::size_t logged = 0;
  std::int64_t late = 0;
  for (auto& f : runs) {
    const auto r = f.get();
    if (r.live == r.batch) ++equal;
    logged += r.logged;
    late += r.late;
  }
  return {equal == 20, std::to_string(equal) + "/20 sessions: live SCORE equals offline judge_session (" +
                           std::to_string(logged) + " strikes judged, " + std::to_string(late) + " late)"};
}

}  // namespace

int main() {
  criterion("bundled charts: song_a 80 notes in 10x8, song_b 49 notes in 12/12/12/12/1", 1.0, charts);
  criterion("judge equals exhaustive maximum matching on 1000 random instances", 30.0, judge_oracle);
  criterion("judge order invariance and window monotonicity on 1000 instances", 0.0, judge_invariances);
  criterion("layout arrival invariant: 2 songs x 5 guided layouts x 3 speeds within 1e-9 m", 0.0, layout_arrival);
  criterion("sensor codec: round trip, corruption detection, rigid pose, STILL frame count", 0.0, sensor_codec);
  criterion("balanced Latin square k = 6: Latin and every ordered adjacent pair once", 0.0, latin_square);
  criterion("stats: fixture ss/F/eta_G, F(5,35) tail at 2.485, Bonferroni min(1, 15p)", 0.0, stats_oracle);
  criterion("headless study: study + analyze clean, decomposition identity, reproducible report", 60.0,
            headless_study);
  criterion("live/batch equivalence over loopback on 20 seeded strike logs", 0.0, live_batch);
  return failures == 0 ? 0 : 1;
}
