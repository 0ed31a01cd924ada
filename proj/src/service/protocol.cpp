#include <charconv>

#include "handpan/service.hpp"

namespace handpan::service {

namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t sp = line.find(' ', pos);
    out.push_back(line.substr(pos, sp == std::string_view::npos ? std::string_view::npos : sp - pos));
    if (sp == std::string_view::npos) return out;
    pos = sp + 1;
  }
}

template <typename Int>
Int integer(std::string_view token, std::string_view line) {
  Int v{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw BadMessage("bad integer '" + std::string(token) + "' in '" + std::string(line) + "'");
  }
  return v;
}

void expect_fields(const std::vector<std::string_view>& f, std::size_t n, std::string_view line) {
  if (f.size() != n) {
    throw BadMessage("expected " + std::to_string(n) + " fields in '" + std::string(line) + "'");
  }
}

bool printable_name(std::string_view name) {
  if (name.empty()) return false;
  for (unsigned char c : name) {
    if (c < 0x20 || c == 0x7F) return false;
  }
  return true;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string encode_client(const ClientMessage& message) {
  return std::visit(
      overloaded{
          [](const msg::ClientHello& m) {
            if (!printable_name(m.name)) {
              throw BadMessage("HELLO name must be non-empty printable text");
            }
            return "HELLO " + m.name;
          },
          [](const msg::Ready&) { return std::string("READY"); },
          [](const msg::Ping& m) { return "PING " + std::to_string(m.t_client); },
          [](const msg::Strike& m) {
            if (m.dimple < 0 || m.dimple >= chart::kDimpleCount) {
              throw BadMessage("STRIKE dimple " + std::to_string(m.dimple) + " out of range");
            }
            return "STRIKE " + std::to_string(m.dimple) + " " + std::to_string(m.t_client_ms);
          },
      },
      message);
}

ClientMessage decode_client(std::string_view line) {
  if (line.starts_with("HELLO ")) {
    const auto name = line.substr(6);
    if (!printable_name(name)) {
      throw BadMessage("HELLO name must be non-empty printable text");
    }
    return msg::ClientHello{std::string(name)};
  }
  const auto f = split_spaces(line);
  if (f[0] == "READY") {
    expect_fields(f, 1, line);
    return msg::Ready{};
  }
  if (f[0] == "PING") {
    expect_fields(f, 2, line);
    return msg::Ping{integer<std::int64_t>(f[1], line)};
  }
  if (f[0] == "STRIKE") {
    expect_fields(f, 3, line);
    const int dimple = integer<int>(f[1], line);
    if (dimple < 0 || dimple >= chart::kDimpleCount) {
      throw BadMessage("STRIKE dimple " + std::to_string(dimple) + " out of range 0-7");
    }
    return msg::Strike{dimple, integer<std::int64_t>(f[2], line)};
  }
  throw BadMessage("unknown client message '" + std::string(line) + "'");
}

std::vector<std::string> encode_server(const ServerMessage& message) {
  return std::visit(
      overloaded{
          [](const msg::ServerHello& m) { return std::vector<std::string>{"HELLO " + m.version}; },
          [](const msg::Layout& m) {
            std::vector<std::string> lines{"LAYOUT " + std::string(layouts::kind_name(m.kind))};
            std::size_t pos = 0;
            while (pos < m.blob.size()) {
              std::size_t end = m.blob.find('\n', pos);
              if (end == std::string::npos) end = m.blob.size();
              std::string line = m.blob.substr(pos, end - pos);
              if (line == "ENDLAYOUT") {
                throw BadMessage("layout blob contains a terminator line");
              }
              lines.push_back(std::move(line));
              pos = end + 1;
            }
            lines.emplace_back("ENDLAYOUT");
            return lines;
          },
          [](const msg::Start& m) { return std::vector<std::string>{"START " + std::to_string(m.t0_ms)}; },
          [](const msg::Judge& m) {
            std::string line = "JUDGE " + std::to_string(m.note_id);
            line += m.hit ? " HIT " + std::to_string(m.delta_ms) : " MISS";
            return std::vector<std::string>{line};
          },
          [](const msg::Score& m) {
            return std::vector<std::string>{"SCORE " + std::to_string(m.hits) + " " + std::to_string(m.total)};
          },
          [](const msg::End&) { return std::vector<std::string>{"END"}; },
          [](const msg::Pong& m) {
            return std::vector<std::string>{"PONG " + std::to_string(m.t_client) + " " + std::to_string(m.t_server)};
          },
      },
      message);
}

std::optional<ServerMessage> ServerStreamDecoder::feed(std::string_view line) {
  if (layout_) {
    if (line == "ENDLAYOUT") {
      ServerMessage out = std::move(*layout_);
      layout_.reset();
      return out;
    }
    layout_->blob.append(line);
    layout_->blob.push_back('\n');
    return std::nullopt;
  }
  const auto f = split_spaces(line);
  if (f[0] == "HELLO") {
    expect_fields(f, 2, line);
    if (f[1] != kProtocolVersion) throw BadMessage("unsupported protocol version '" + std::string(f[1]) + "'");
    return msg::ServerHello{std::string(f[1])};
  }
  if (f[0] == "LAYOUT") {
    expect_fields(f, 2, line);
    try {
      layout_ = msg::Layout{layouts::parse_kind(f[1]), {}};
    } catch (const InvalidParams& e) {
      throw BadMessage(e.what());
    }
    return std::nullopt;
  }
  if (f[0] == "START") {
    expect_fields(f, 2, line);
    return msg::Start{integer<std::int64_t>(f[1], line)};
  }
  if (f[0] == "JUDGE") {
    if (f.size() == 3 && f[2] == "MISS") {
      return msg::Judge{integer<int>(f[1], line), false, 0};
    }
    if (f.size() == 4 && f[2] == "HIT") {
      return msg::Judge{integer<int>(f[1], line), true, integer<std::int64_t>(f[3], line)};
    }
    throw BadMessage("malformed JUDGE '" + std::string(line) + "'");
  }
  if (f[0] == "SCORE") {
    expect_fields(f, 3, line);
    return msg::Score{integer<int>(f[1], line), integer<int>(f[2], line)};
  }
  if (f[0] == "END") {
    expect_fields(f, 1, line);
    return msg::End{};
  }
  if (f[0] == "PONG") {
    expect_fields(f, 3, line);
    return msg::Pong{integer<std::int64_t>(f[1], line), integer<std::int64_t>(f[2], line)};
  }
  throw BadMessage("unknown server message '" + std::string(line) + "'");
}

ClockSync estimate_offset(std::int64_t t_client_send, std::int64_t t_server, std::int64_t t_client_recv) {
  if (t_client_recv < t_client_send) {
    throw NonMonotoneClock();
  }
  ClockSync sync;
  sync.offset_ms = static_cast<double>(t_server) -
                   (static_cast<double>(t_client_send) + static_cast<double>(t_client_recv)) / 2.0;
  sync.rtt_ms = static_cast<double>(t_client_recv - t_client_send);
  return sync;
}

void PingTracker::on_ping(std::int64_t t_client, std::int64_t t_server_reply) {
  ++pings_;
  if (previous_) {
    try {
      const ClockSync sample = estimate_offset(previous_->first, previous_->second, t_client);
      if (!chained_ || sample.rtt_ms < best_->rtt_ms) {
        best_ = sample;
        chained_ = true;
      }
    } catch (const NonMonotoneClock&) {
      // Client clock stepped backwards; start a fresh chain.
    }
  } else if (!best_) {
    // A lone PING only bounds the offset from one side.
    best_ = ClockSync{static_cast<double>(t_server_reply - t_client), 0.0};
  }
  previous_ = {t_client, t_server_reply};
}

ServerClock::ServerClock(double rate, std::int64_t offset_ms)
    : origin_(std::chrono::steady_clock::now()), rate_(rate), offset_ms_(offset_ms) {
  if (!(rate > 0.0)) {
    throw InvalidParams("clock rate must be positive");
  }
}

std::int64_t ServerClock::now_ms() const {
  const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - origin_).count();
  return offset_ms_ + static_cast<std::int64_t>(elapsed * rate_);
}

ServerClock ServerClock::shifted(std::int64_t offset_ms) const {
  ServerClock out = *this;
  out.offset_ms_ = offset_ms;
  return out;
}

std::chrono::microseconds ServerClock::real_until(std::int64_t t_ms) const {
  const std::int64_t now = now_ms();
  if (t_ms <= now) return std::chrono::microseconds(0);
  return std::chrono::microseconds(static_cast<std::int64_t>(static_cast<double>(t_ms - now) * 1000.0 / rate_) + 1);
}

}  // namespace handpan::service
