#include <algorithm>
#include <cmath>

#include "handpan/net.hpp"
#include "handpan/service.hpp"

namespace handpan::service {

namespace {

// Longest real wait between checks when no deadline is pending.
constexpr auto kIdlePoll = std::chrono::milliseconds(250);
// A scripted client gives up when the server is silent this long.
constexpr auto kClientPatience = std::chrono::seconds(30);

void send_all_messages(LineConnection& connection, const std::vector<ServerMessage>& messages) {
  for (const auto& m : messages) {
    for (const auto& line : encode_server(m)) {
      connection.send_line(line);
    }
  }
}

LiveOutcome outcome_of(const LiveSession& s, const layouts::LayoutGeometry& layout, const LiveOptions& options) {
  LiveOutcome out;
  out.result.participant = s.participant().empty() ? "anonymous" : s.participant();
  out.result.order_index = 0;
  out.result.interface = layout.kind;
  out.result.song_id = options.song_id.empty() ? chart::chart_id(s.chart()) : options.song_id;
  out.result.score = s.hits();
  out.result.max_score = s.total();
  out.result.window_ms = options.window_ms;
  out.result.timestamp = session::iso8601_utc(std::chrono::time_point_cast<std::chrono::milliseconds>(
      std::chrono::system_clock::now()));
  out.complete = s.ended();
  out.strike_log = s.strike_log();
  out.late_strikes = s.late_strikes();
  out.sync = s.clock_sync();
  return out;
}

}  // namespace

LiveOutcome live_session(const chart::Chart& chart, const layouts::LayoutGeometry& layout, const LiveOptions& options,
                         LineConnection& connection, const ServerClock& clock) {
  LiveSession s(chart, layout, options);
  try {
    while (!s.ended()) {
      std::chrono::microseconds wait = kIdlePoll;
      if (const auto deadline = s.next_deadline()) {
        wait = std::min(wait, clock.real_until(*deadline));
      }
      const Received r = connection.receive_line(wait);
      if (r.status == RecvStatus::Closed) {
        if (s.phase() != Phase::Running) {
          throw ClientDisconnected("client left before START");
        }
        return outcome_of(s, layout, options);
      }
      std::vector<ServerMessage> out;
      if (r.status == RecvStatus::Line) {
        ClientMessage message;
        try {
          message = decode_client(r.line);
        } catch (const BadMessage& e) {
          throw ProtocolViolation(e.what());
        }
        out = s.handle(message, clock.now_ms());
      }
      auto due = s.tick(clock.now_ms());
      out.insert(out.end(), std::make_move_iterator(due.begin()), std::make_move_iterator(due.end()));
      send_all_messages(connection, out);
    }
  } catch (const ProtocolViolation&) {
    try {
      send_all_messages(connection, {msg::End{}});
    } catch (const Error&) {
    }
    throw;
  } catch (const ClientDisconnected&) {
    if (s.phase() != Phase::Running && s.phase() != Phase::Ended) throw;
  }
  return outcome_of(s, layout, options);
}

ScriptedClientResult run_scripted_client(LineConnection& connection, const ServerClock& clock,
                                         const ScriptedClientOptions& options) {
  ScriptedClientResult result;
  ServerStreamDecoder decoder;

  const auto send = [&](const ClientMessage& m) {
    std::string line = encode_client(m);
    connection.send_line(line);
    result.sent.push_back(std::move(line));
  };
  const auto account = [&](const ServerMessage& m) {
    if (const auto* j = std::get_if<msg::Judge>(&m)) {
      ++(j->hit ? result.judged_hits : result.judged_misses);
    } else if (const auto* sc = std::get_if<msg::Score>(&m)) {
      result.final_hits = sc->hits;
      result.total = sc->total;
    } else if (std::holds_alternative<msg::End>(m)) {
      result.saw_end = true;
    } else if (const auto* l = std::get_if<msg::Layout>(&m)) {
      result.layout = *l;
    }
  };
  // Next complete server message, or nullopt if `wait` passes first.
  const auto next = [&](std::chrono::microseconds wait) -> std::optional<ServerMessage> {
    const auto deadline = std::chrono::steady_clock::now() + wait;
    while (true) {
      const auto left = std::chrono::duration_cast<std::chrono::microseconds>(deadline - std::chrono::steady_clock::now());
      const Received r = connection.receive_line(std::max(left, std::chrono::microseconds(0)));
      if (r.status == RecvStatus::Closed) throw ClientDisconnected("server closed the connection");
      if (r.status == RecvStatus::Timeout) return std::nullopt;
      if (auto m = decoder.feed(r.line)) {
        account(*m);
        return m;
      }
    }
  };
  const auto expect = [&]<typename T>(std::type_identity<T>) -> T {
    while (true) {
      auto m = next(kClientPatience);
      if (!m) throw IoError("server silent");
      if (auto* v = std::get_if<T>(&*m)) return *v;
      if (std::holds_alternative<msg::End>(*m)) throw ProtocolViolation("server ended the session early");
    }
  };

  send(msg::ClientHello{options.name});
  expect(std::type_identity<msg::ServerHello>{});

  std::optional<ClockSync> best;
  for (int i = 0; i < options.pings; ++i) {
    const std::int64_t t_send = clock.now_ms();
    send(msg::Ping{t_send});
    msg::Pong pong;
    do {
      pong = expect(std::type_identity<msg::Pong>{});
    } while (pong.t_client != t_send);
    const ClockSync sample = estimate_offset(t_send, pong.t_server, clock.now_ms());
    if (!best || sample.rtt_ms < best->rtt_ms) best = sample;
  }
  result.sync = best.value_or(ClockSync{});
  const auto offset = std::llround(result.sync.offset_ms);

  send(msg::Ready{});
  expect(std::type_identity<msg::Layout>{});
  const std::int64_t t0 = expect(std::type_identity<msg::Start>{}).t0_ms;

  auto strikes = options.strikes;
  std::stable_sort(strikes.begin(), strikes.end(),
                   [](const judge::Strike& a, const judge::Strike& b) { return a.t_ms < b.t_ms; });
  for (const auto& s : strikes) {
    const std::int64_t target = t0 + s.t_ms - offset;
    while (!result.saw_end && clock.now_ms() < target) {
      next(clock.real_until(target));
    }
    if (result.saw_end) break;
    send(msg::Strike{s.dimple, target});
  }
  while (!result.saw_end) {
    if (!next(kClientPatience)) throw IoError("server silent");
  }
  return result;
}

}  // namespace handpan::service
