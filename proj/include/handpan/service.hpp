#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "handpan/chart.hpp"
#include "handpan/error.hpp"
#include "handpan/judge.hpp"
#include "handpan/layouts.hpp"
#include "handpan/session.hpp"

namespace handpan::service {

class BadMessage : public Error {
 public:
  using Error::Error;
};

class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

class ClientDisconnected : public Error {
 public:
  using Error::Error;
};

class NonMonotoneClock : public Error {
 public:
  NonMonotoneClock() : Error("client receive time precedes send time") {}
};

// ---------------------------------------------------------------------------
// Line protocol
//
//   server -> client              client -> server
//   HELLO v1                      HELLO <name>
//   LAYOUT <kind>                 READY
//     <layout blob lines>         PING <t_client>
//   ENDLAYOUT                     STRIKE <dimple> <t_client_ms>
//   START <t0_ms>
//   JUDGE <note_id> HIT <delta_ms>
//   JUDGE <note_id> MISS
//   SCORE <hits> <total>
//   END
//   PONG <t_client> <t_server>
// ---------------------------------------------------------------------------

inline constexpr std::string_view kProtocolVersion = "v1";

namespace msg {

struct ClientHello {
  std::string name;
  friend bool operator==(const ClientHello&, const ClientHello&) = default;
};
struct Ready {
  friend bool operator==(const Ready&, const Ready&) = default;
};
struct Ping {
  std::int64_t t_client = 0;
  friend bool operator==(const Ping&, const Ping&) = default;
};
struct Strike {
  int dimple = 0;
  std::int64_t t_client_ms = 0;
  friend bool operator==(const Strike&, const Strike&) = default;
};

struct ServerHello {
  std::string version{kProtocolVersion};
  friend bool operator==(const ServerHello&, const ServerHello&) = default;
};
struct Layout {
  layouts::InterfaceKind kind = layouts::InterfaceKind::StandardPath;
  std::string blob;  // serialize_layout output, newline-terminated lines
  friend bool operator==(const Layout&, const Layout&) = default;
};
struct Start {
  std::int64_t t0_ms = 0;
  friend bool operator==(const Start&, const Start&) = default;
};
struct Judge {
  int note_id = 0;
  bool hit = false;
  std::int64_t delta_ms = 0;  // meaningful for hits only
  friend bool operator==(const Judge&, const Judge&) = default;
};
struct Score {
  int hits = 0;
  int total = 0;
  friend bool operator==(const Score&, const Score&) = default;
};
struct End {
  friend bool operator==(const End&, const End&) = default;
};
struct Pong {
  std::int64_t t_client = 0;
  std::int64_t t_server = 0;
  friend bool operator==(const Pong&, const Pong&) = default;
};

}  // namespace msg

using ClientMessage = std::variant<msg::ClientHello, msg::Ready, msg::Ping, msg::Strike>;
using ServerMessage =
    std::variant<msg::ServerHello, msg::Layout, msg::Start, msg::Judge, msg::Score, msg::End, msg::Pong>;

std::string encode_client(const ClientMessage& message);
/// Throws BadMessage for unknown kinds, bad numbers or out-of-range dimples.
ClientMessage decode_client(std::string_view line);

/// One line per message except LAYOUT, which spans the blob and ENDLAYOUT.
std::vector<std::string> encode_server(const ServerMessage& message);

/// Reassembles server messages from lines, buffering LAYOUT blocks.
class ServerStreamDecoder {
 public:
  /// Returns a message once one is complete. Throws BadMessage.
  std::optional<ServerMessage> feed(std::string_view line);
  bool in_layout() const { return layout_.has_value(); }

 private:
  std::optional<msg::Layout> layout_;
};

// ---------------------------------------------------------------------------
// Clock sync
// ---------------------------------------------------------------------------

struct ClockSync {
  double offset_ms = 0.0;  // server minus client
  double rtt_ms = 0.0;
};

/// offset = t_server - (t_send + t_recv) / 2, rtt = t_recv - t_send.
ClockSync estimate_offset(std::int64_t t_client_send, std::int64_t t_server, std::int64_t t_client_recv);

/// Server-side offset estimate from a stream of PINGs. A client sends each
/// PING only after the previous PONG arrived, so the next PING's timestamp
/// bounds the previous PONG's arrival; each consecutive pair is one
/// estimate_offset sample and the lowest-rtt sample wins.
class PingTracker {
 public:
  void on_ping(std::int64_t t_client, std::int64_t t_server_reply);
  std::optional<ClockSync> best() const { return best_; }
  int pings() const { return pings_; }

 private:
  std::optional<std::pair<std::int64_t, std::int64_t>> previous_;
  std::optional<ClockSync> best_;
  bool chained_ = false;
  int pings_ = 0;
};

/// Millisecond clock with an adjustable rate and offset over a shared steady origin.
class ServerClock {
 public:
  explicit ServerClock(double rate = 1.0, std::int64_t offset_ms = 0);
  std::int64_t now_ms() const;
  /// Same origin and rate, different offset.
  ServerClock shifted(std::int64_t offset_ms) const;
  /// Real time until the clock reads `t_ms` (zero if already past).
  std::chrono::microseconds real_until(std::int64_t t_ms) const;
  double rate() const { return rate_; }

 private:
  std::chrono::steady_clock::time_point origin_;
  double rate_;
  std::int64_t offset_ms_;
};

// ---------------------------------------------------------------------------
// Live session engine
// ---------------------------------------------------------------------------

struct LiveOptions {
  std::int64_t window_ms = judge::kDefaultWindowMs;
  // A note is declared missed this long after onset + window, leaving room
  // for strikes still in flight.
  std::int64_t commit_grace_ms = 150;
  std::int64_t lead_in_ms = 1000;
  // Subtracted from every strike's server time before judging.
  std::int64_t latency_compensation_ms = 0;
  std::string song_id;
};

enum class Phase { AwaitHello, Syncing, Running, Ended };

/// Authoritative, transport-free session state machine. Times are server
/// milliseconds. Strikes are matched with the same per-dimple scan as
/// judge::match_dimple, applied as they arrive; a hit is final when it is
/// made and a miss is committed at onset + window + grace. Strikes that
/// arrive too late to be judged that way (older than the grace period, or
/// earlier than a judged strike on the same dimple) are counted in
/// late_strikes() and left out of strike_log(), so the final score always
/// equals judge_session over strike_log().
class LiveSession {
 public:
  LiveSession(chart::Chart chart, layouts::LayoutGeometry layout, LiveOptions options);

  /// Throws ProtocolViolation for out-of-order messages.
  std::vector<ServerMessage> handle(const ClientMessage& message, std::int64_t now_ms);
  std::vector<ServerMessage> tick(std::int64_t now_ms);
  /// Next time tick() has work to do.
  std::optional<std::int64_t> next_deadline() const;

  Phase phase() const { return phase_; }
  bool ended() const { return phase_ == Phase::Ended; }
  const std::string& participant() const { return participant_; }
  const chart::Chart& chart() const { return chart_; }
  std::int64_t t0_ms() const { return t0_ms_; }
  int hits() const { return hits_; }
  int total() const { return static_cast<int>(notes_.size()); }
  /// Strikes in chart time (ms from START), in arrival order.
  const std::vector<judge::Strike>& strike_log() const { return strike_log_; }
  std::int64_t late_strikes() const { return late_strikes_; }
  ClockSync clock_sync() const;

 private:
  std::vector<ServerMessage> start(std::int64_t now_ms);
  std::vector<ServerMessage> strike(const msg::Strike& s, std::int64_t now_ms);
  std::vector<ServerMessage> commit_misses(std::int64_t now_ms);

  chart::Chart chart_;
  layouts::LayoutGeometry layout_;
  LiveOptions options_;
  Phase phase_ = Phase::AwaitHello;
  std::string participant_;
  PingTracker pings_;
  std::optional<ClockSync> frozen_sync_;
  std::int64_t t0_ms_ = 0;

  std::vector<chart::Note> notes_;                 // by id
  std::vector<std::vector<std::size_t>> lanes_;    // per dimple, note ids by onset
  std::vector<std::size_t> lane_cursor_;           // first possibly open position per lane
  std::vector<std::optional<std::int64_t>> last_strike_;  // per dimple, chart time
  std::vector<bool> resolved_;
  std::size_t miss_cursor_ = 0;                    // into notes_ by onset order
  std::vector<std::size_t> by_onset_;
  std::size_t unresolved_ = 0;
  int hits_ = 0;
  std::vector<judge::Strike> strike_log_;
  std::int64_t late_strikes_ = 0;
};

// ---------------------------------------------------------------------------
// Transport-facing drivers
// ---------------------------------------------------------------------------

class LineConnection;

struct LiveOutcome {
  session::TrialResult result;
  bool complete = false;  // false when the client disconnected mid-session
  std::vector<judge::Strike> strike_log;
  std::int64_t late_strikes = 0;
  ClockSync sync;
};

/// Runs one session over `connection` until END. Throws ClientDisconnected
/// when the client leaves before START and ProtocolViolation (after sending
/// END) when it breaks message order.
LiveOutcome live_session(const chart::Chart& chart, const layouts::LayoutGeometry& layout, const LiveOptions& options,
                         LineConnection& connection, const ServerClock& clock);

struct ScriptedClientOptions {
  std::string name = "scripted";
  int pings = 5;
  std::vector<judge::Strike> strikes;  // chart time
};

struct ScriptedClientResult {
  int final_hits = 0;
  int total = 0;
  int judged_hits = 0;
  int judged_misses = 0;
  ClockSync sync;
  bool saw_end = false;
  std::optional<msg::Layout> layout;
  std::vector<std::string> sent;  // lines, in order
};

/// Test and demo client: syncs, sends READY, then sends each strike when its
/// chart time arrives on `clock`, and reads until END.
ScriptedClientResult run_scripted_client(LineConnection& connection, const ServerClock& clock,
                                         const ScriptedClientOptions& options);

}  // namespace handpan::service
