#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include "handpan/service.hpp"

namespace handpan::service {

enum class RecvStatus { Line, Timeout, Closed };

struct Received {
  RecvStatus status = RecvStatus::Timeout;
  std::string line;
};

/// A bidirectional stream of text lines. send_line throws ClientDisconnected
/// once the peer is gone.
class LineConnection {
 public:
  virtual ~LineConnection() = default;
  virtual void send_line(std::string_view line) = 0;
  virtual Received receive_line(std::chrono::microseconds timeout) = 0;
  virtual void close() = 0;
};

/// Lines longer than this are a protocol violation.
inline constexpr std::size_t kMaxLineBytes = 1 << 16;

/// Newline-framed lines over a connected stream socket. Owns the descriptor.
class SocketConnection : public LineConnection {
 public:
  explicit SocketConnection(int fd);
  ~SocketConnection() override;
  SocketConnection(const SocketConnection&) = delete;
  SocketConnection& operator=(const SocketConnection&) = delete;

  void send_line(std::string_view line) override;
  Received receive_line(std::chrono::microseconds timeout) override;
  void close() override;

 private:
  int fd_;
  std::string buffer_;
  bool eof_ = false;
};

// ---------------------------------------------------------------------------
// WebSocket framing (RFC 6455), text frames carrying protocol lines
// ---------------------------------------------------------------------------

namespace ws {

inline constexpr std::uint8_t kContinuation = 0x0;
inline constexpr std::uint8_t kText = 0x1;
inline constexpr std::uint8_t kBinary = 0x2;
inline constexpr std::uint8_t kClose = 0x8;
inline constexpr std::uint8_t kPing = 0x9;
inline constexpr std::uint8_t kPong = 0xA;

using Mask = std::array<std::uint8_t, 4>;

struct Frame {
  bool fin = true;
  std::uint8_t opcode = kText;
  bool masked = false;
  std::string payload;  // unmasked
  friend bool operator==(const Frame&, const Frame&) = default;
};

std::string base64_encode(std::string_view bytes);
/// base64(SHA-1(key + GUID)).
std::string accept_key(std::string_view client_key);
std::string encode_frame(std::uint8_t opcode, std::string_view payload, std::optional<Mask> mask = std::nullopt);
/// Removes and returns one complete frame from the front of `buffer`, or
/// nullopt if more bytes are needed. Throws ProtocolViolation on malformed
/// or oversized frames.
std::optional<Frame> take_frame(std::string& buffer);

}  // namespace ws

/// Lines over WebSocket text frames, one line per frame. Client-role
/// connections mask what they send.
class WebSocketConnection : public LineConnection {
 public:
  enum class Role { Server, Client };
  /// `pending` holds bytes already read past the handshake.
  WebSocketConnection(int fd, Role role, std::string pending = {});
  ~WebSocketConnection() override;
  WebSocketConnection(const WebSocketConnection&) = delete;
  WebSocketConnection& operator=(const WebSocketConnection&) = delete;

  void send_line(std::string_view line) override;
  Received receive_line(std::chrono::microseconds timeout) override;
  void close() override;

 private:
  void send_frame(std::uint8_t opcode, std::string_view payload);

  int fd_;
  Role role_;
  std::mt19937 rng_;
  std::string buffer_;
  std::optional<std::string> message_;  // fragments of the message being assembled
  std::deque<std::string> lines_;
  bool closed_ = false;
};

/// Listening TCP socket. accept() speaks plain lines or, when the client
/// opens with an HTTP GET upgrade, WebSocket.
class TcpListener {
 public:
  /// Port 0 picks an ephemeral port.
  explicit TcpListener(std::uint16_t port, const std::string& host = "127.0.0.1");
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return port_; }
  /// nullptr on timeout.
  std::unique_ptr<LineConnection> accept(std::chrono::milliseconds timeout);

 private:
  int fd_;
  std::uint16_t port_;
};

/// Two connected plain-line endpoints over a local socket pair.
std::pair<std::unique_ptr<LineConnection>, std::unique_ptr<LineConnection>> connection_pair();

std::unique_ptr<LineConnection> connect_tcp(const std::string& host, std::uint16_t port);
std::unique_ptr<LineConnection> connect_websocket(const std::string& host, std::uint16_t port,
                                                  const std::string& path = "/");

/// Completes the server side of the opening handshake on `fd`. Returns any
/// bytes read past the request. Throws ProtocolViolation (after replying
/// 400) for requests that are not WebSocket upgrades.
std::string websocket_server_handshake(int fd, std::chrono::milliseconds timeout);

}  // namespace handpan::service
