#include <openssl/evp.h>
#include <sys/socket.h>

#include <algorithm>
#include <cctype>
#include <map>

#include "handpan/net.hpp"
#include "socket_util.hpp"

namespace handpan::service {

namespace {

constexpr std::string_view kGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";
constexpr std::size_t kMaxHandshakeBytes = 8192;
constexpr std::size_t kMaxMessageBytes = 4 * kMaxLineBytes;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

struct HttpHead {
  std::string start_line;
  std::map<std::string, std::string> headers;  // lower-case names
};

HttpHead parse_head(std::string_view head) {
  HttpHead out;
  std::size_t pos = 0;
  bool first = true;
  while (pos < head.size()) {
    std::size_t end = head.find('\n', pos);
    if (end == std::string_view::npos) end = head.size();
    std::string_view line = head.substr(pos, end - pos);
    if (line.ends_with('\r')) line.remove_suffix(1);
    pos = end + 1;
    if (first) {
      out.start_line = std::string(line);
      first = false;
      continue;
    }
    const std::size_t colon = line.find(':');
    if (colon == std::string_view::npos) continue;
    out.headers[lower(trim(line.substr(0, colon)))] = std::string(trim(line.substr(colon + 1)));
  }
  return out;
}

// Reads up to the blank line ending an HTTP head (bare LF line ends are
// tolerated); leftover bytes go to `rest`.
std::string read_head(int fd, std::chrono::milliseconds timeout, std::string& rest) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string buffer;
  while (true) {
    const std::size_t crlf = buffer.find("\r\n\r\n");
    const std::size_t lf = buffer.find("\n\n");
    if (crlf != std::string::npos && (lf == std::string::npos || crlf < lf)) {
      rest = buffer.substr(crlf + 4);
      return buffer.substr(0, crlf);
    }
    if (lf != std::string::npos) {
      rest = buffer.substr(lf + 2);
      return buffer.substr(0, lf);
    }
    if (buffer.size() > kMaxHandshakeBytes) {
      throw ProtocolViolation("HTTP head too large");
    }
    const auto left = std::chrono::duration_cast<std::chrono::microseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0 || !detail::wait_readable(fd, left)) {
      throw ProtocolViolation("timed out waiting for WebSocket handshake");
    }
    if (!detail::read_into(fd, buffer)) {
      throw ClientDisconnected("connection closed during WebSocket handshake");
    }
  }
}

bool contains_token(std::string_view value, std::string_view token) {
  return lower(value).find(lower(token)) != std::string::npos;
}

}  // namespace

namespace ws {

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string accept_key(std::string_view client_key) {
  std::string input(client_key);
  input += kGuid;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(input.data(), input.size(), digest, &len, EVP_sha1(), nullptr) != 1) {
    throw Error("SHA-1 digest failed");
  }
  return base64_encode(std::string_view(reinterpret_cast<const char*>(digest), len));
}

std::string encode_frame(std::uint8_t opcode, std::string_view payload, std::optional<Mask> mask) {
  std::string out;
  out.push_back(static_cast<char>(0x80 | (opcode & 0x0F)));
  const std::uint8_t mask_bit = mask ? 0x80 : 0x00;
  const std::uint64_t n = payload.size();
  if (n < 126) {
    out.push_back(static_cast<char>(mask_bit | n));
  } else if (n <= 0xFFFF) {
    out.push_back(static_cast<char>(mask_bit | 126));
    out.push_back(static_cast<char>(n >> 8));
    out.push_back(static_cast<char>(n & 0xFF));
  } else {
    out.push_back(static_cast<char>(mask_bit | 127));
    for (int shift = 56; shift >= 0; shift -= 8) {
      out.push_back(static_cast<char>((n >> shift) & 0xFF));
    }
  }
  if (!mask) {
    out.append(payload);
    return out;
  }
  for (auto b : *mask) out.push_back(static_cast<char>(b));
  for (std::size_t i = 0; i < payload.size(); ++i) {
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(payload[i]) ^ (*mask)[i % 4]));
  }
  return out;
}

std::optional<Frame> take_frame(std::string& buffer) {
  if (buffer.size() < 2) return std::nullopt;
  const auto byte = [&](std::size_t i) { return static_cast<std::uint8_t>(buffer[i]); };
  Frame frame;
  frame.fin = (byte(0) & 0x80) != 0;
  if ((byte(0) & 0x70) != 0) {
    throw ProtocolViolation("WebSocket reserved bits set");
  }
  frame.opcode = byte(0) & 0x0F;
  const bool control = (frame.opcode & 0x08) != 0;
  const bool known = frame.opcode <= kBinary || (frame.opcode >= kClose && frame.opcode <= kPong);
  if (!known) {
    throw ProtocolViolation("unknown WebSocket opcode " + std::to_string(frame.opcode));
  }
  frame.masked = (byte(1) & 0x80) != 0;
  std::uint64_t n = byte(1) & 0x7F;
  std::size_t pos = 2;
  if (n == 126) {
    if (buffer.size() < 4) return std::nullopt;
    n = (std::uint64_t{byte(2)} << 8) | byte(3);
    pos = 4;
  } else if (n == 127) {
    if (buffer.size() < 10) return std::nullopt;
    n = 0;
    for (std::size_t i = 2; i < 10; ++i) n = (n << 8) | byte(i);
    pos = 10;
  }
  if (control && (n > 125 || !frame.fin)) {
    throw ProtocolViolation("malformed WebSocket control frame");
  }
  if (n > kMaxMessageBytes) {
    throw ProtocolViolation("WebSocket frame too large");
  }
  Mask mask{};
  if (frame.masked) {
    if (buffer.size() < pos + 4) return std::nullopt;
    for (std::size_t i = 0; i < 4; ++i) mask[i] = byte(pos + i);
    pos += 4;
  }
  if (buffer.size() < pos + n) return std::nullopt;
  frame.payload = buffer.substr(pos, static_cast<std::size_t>(n));
  if (frame.masked) {
    for (std::size_t i = 0; i < frame.payload.size(); ++i) {
      frame.payload[i] = static_cast<char>(static_cast<std::uint8_t>(frame.payload[i]) ^ mask[i % 4]);
    }
  }
  buffer.erase(0, pos + static_cast<std::size_t>(n));
  return frame;
}

}  // namespace ws

std::string websocket_server_handshake(int fd, std::chrono::milliseconds timeout) {
  std::string rest;
  const HttpHead head = parse_head(read_head(fd, timeout, rest));
  const auto header = [&](const std::string& name) -> std::string {
    const auto it = head.headers.find(name);
    return it == head.headers.end() ? std::string{} : it->second;
  };
  const std::string key = header("sec-websocket-key");
  const std::string version = header("sec-websocket-version");
  if (!head.start_line.starts_with("GET ") || !contains_token(header("upgrade"), "websocket") || key.empty() ||
      (!version.empty() && version != "13")) {
    detail::send_all(fd, "HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\nConnection: close\r\n\r\n");
    throw ProtocolViolation("not a WebSocket upgrade request: '" + head.start_line + "'");
  }
  detail::send_all(fd, "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                       "Sec-WebSocket-Accept: " +
                           ws::accept_key(key) + "\r\n\r\n");
  return rest;
}

WebSocketConnection::WebSocketConnection(int fd, Role role, std::string pending)
    : fd_(fd), role_(role), rng_(std::random_device{}()), buffer_(std::move(pending)) {}

WebSocketConnection::~WebSocketConnection() { detail::close_fd(fd_); }

void WebSocketConnection::send_frame(std::uint8_t opcode, std::string_view payload) {
  if (fd_ < 0 || closed_) throw ClientDisconnected("connection closed");
  std::optional<ws::Mask> mask;
  if (role_ == Role::Client) {
    std::uniform_int_distribution<int> byte(0, 255);
    mask = ws::Mask{};
    for (auto& b : *mask) b = static_cast<std::uint8_t>(byte(rng_));
  }
  detail::send_all(fd_, ws::encode_frame(opcode, payload, mask));
}

void WebSocketConnection::send_line(std::string_view line) { send_frame(ws::kText, line); }

Received WebSocketConnection::receive_line(std::chrono::microseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    if (!lines_.empty()) {
      Received r{RecvStatus::Line, std::move(lines_.front())};
      lines_.pop_front();
      return r;
    }
    if (closed_ || fd_ < 0) return {RecvStatus::Closed, {}};

    if (auto frame = ws::take_frame(buffer_)) {
      if (frame->masked != (role_ == Role::Server)) {
        throw ProtocolViolation(role_ == Role::Server ? "client frame not masked" : "server frame masked");
      }
      switch (frame->opcode) {
        case ws::kText:
        case ws::kBinary:
          if (message_) throw ProtocolViolation("new WebSocket message inside a fragmented one");
          message_ = std::move(frame->payload);
          break;
        case ws::kContinuation:
          if (!message_) throw ProtocolViolation("WebSocket continuation without a message");
          message_->append(frame->payload);
          break;
        case ws::kClose:
          try {
            send_frame(ws::kClose, frame->payload.substr(0, std::min<std::size_t>(2, frame->payload.size())));
          } catch (const ClientDisconnected&) {
          }
          closed_ = true;
          return {RecvStatus::Closed, {}};
        case ws::kPing:
          send_frame(ws::kPong, frame->payload);
          continue;
        default:
          continue;
      }
      if (message_->size() > kMaxMessageBytes) {
        throw ProtocolViolation("WebSocket message too large");
      }
      if (frame->fin) {
        std::string_view text = *message_;
        if (text.empty()) lines_.emplace_back();
        while (!text.empty()) {
          std::size_t nl = text.find('\n');
          std::string_view line = text.substr(0, nl);
          if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
          lines_.emplace_back(line);
          text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        }
        message_.reset();
      }
      continue;
    }

    const auto left = std::chrono::duration_cast<std::chrono::microseconds>(deadline - std::chrono::steady_clock::now());
    if (!detail::wait_readable(fd_, std::max(left, std::chrono::microseconds(0)))) {
      return {RecvStatus::Timeout, {}};
    }
    if (!detail::read_into(fd_, buffer_)) {
      closed_ = true;
    }
  }
}

void WebSocketConnection::close() {
  if (fd_ < 0) return;
  if (!closed_) {
    try {
      send_frame(ws::kClose, std::string_view("\x03\xE8", 2));
    } catch (const ClientDisconnected&) {
    }
    closed_ = true;
  }
  ::shutdown(fd_, SHUT_RDWR);
  detail::close_fd(fd_);
}

std::unique_ptr<LineConnection> connect_websocket(const std::string& host, std::uint16_t port,
                                                  const std::string& path) {
  int fd = detail::open_client_socket(host, port);
  try {
    std::random_device rd;
    std::string nonce(16, '\0');
    for (auto& c : nonce) c = static_cast<char>(rd() & 0xFF);
    const std::string key = ws::base64_encode(nonce);
    detail::send_all(fd, "GET " + path + " HTTP/1.1\r\nHost: " + host + ":" + std::to_string(port) +
                             "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                             "\r\nSec-WebSocket-Version: 13\r\n\r\n");
    std::string rest;
    const HttpHead head = parse_head(read_head(fd, std::chrono::milliseconds(5000), rest));
    const auto it = head.headers.find("sec-websocket-accept");
    if (!head.start_line.starts_with("HTTP/1.1 101") || it == head.headers.end() ||
        it->second != ws::accept_key(key)) {
      throw ProtocolViolation("WebSocket handshake rejected: '" + head.start_line + "'");
    }
    return std::make_unique<WebSocketConnection>(fd, WebSocketConnection::Role::Client, std::move(rest));
  } catch (...) {
    detail::close_fd(fd);
    throw;
  }
}

}  // namespace handpan::service
