#include <arpa/inet.h>
#include <cerrno>
#include <cstring>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include "handpan/net.hpp"
#include "socket_util.hpp"

namespace handpan::service {

namespace detail {

bool wait_readable(int fd, std::chrono::microseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const auto left = std::chrono::ceil<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    pollfd p{fd, POLLIN, 0};
    const int rc = ::poll(&p, 1, static_cast<int>(std::max<std::int64_t>(0, left.count())));
    if (rc > 0) return true;
    if (rc == 0) return false;
    if (errno != EINTR) {
      throw IoError(std::string("poll: ") + std::strerror(errno));
    }
  }
}

void send_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ClientDisconnected(std::string("send: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

bool read_into(int fd, std::string& buffer) {
  char chunk[4096];
  while (true) {
    const ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
    if (n > 0) {
      buffer.append(chunk, static_cast<std::size_t>(n));
      return true;
    }
    if (n < 0 && errno == EINTR) continue;
    return false;
  }
}

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

}  // namespace detail

namespace {

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

// Waits up to `timeout` for the first `n` bytes without consuming them.
std::string peek_prefix(int fd, std::size_t n, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string out(n, '\0');
  while (true) {
    const ssize_t got = ::recv(fd, out.data(), n, MSG_PEEK | MSG_DONTWAIT);
    if (got == 0) return {};
    if (got > 0 && static_cast<std::size_t>(got) >= n) return out;
    if (got < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) return {};
    if (got > 0 && out.compare(0, static_cast<std::size_t>(got), std::string_view("GET ").substr(0, got)) != 0) {
      return out.substr(0, static_cast<std::size_t>(got));
    }
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) return got > 0 ? out.substr(0, static_cast<std::size_t>(got)) : std::string{};
    // Partial prefix: poll would return immediately, so nap briefly instead.
    if (got > 0) {
      ::usleep(1000);
    } else {
      detail::wait_readable(fd, std::chrono::duration_cast<std::chrono::microseconds>(deadline - now));
    }
  }
}

}  // namespace

SocketConnection::SocketConnection(int fd) : fd_(fd) { set_nodelay(fd_); }

SocketConnection::~SocketConnection() { detail::close_fd(fd_); }

void SocketConnection::send_line(std::string_view line) {
  if (fd_ < 0) throw ClientDisconnected("connection closed");
  std::string data(line);
  data.push_back('\n');
  detail::send_all(fd_, data);
}

Received SocketConnection::receive_line(std::chrono::microseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    const std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      Received r{RecvStatus::Line, buffer_.substr(0, nl)};
      buffer_.erase(0, nl + 1);
      if (!r.line.empty() && r.line.back() == '\r') r.line.pop_back();
      return r;
    }
    if (buffer_.size() > kMaxLineBytes) {
      throw ProtocolViolation("line exceeds " + std::to_string(kMaxLineBytes) + " bytes");
    }
    if (eof_ || fd_ < 0) return {RecvStatus::Closed, {}};
    const auto left = std::chrono::duration_cast<std::chrono::microseconds>(deadline - std::chrono::steady_clock::now());
    if (!detail::wait_readable(fd_, std::max(left, std::chrono::microseconds(0)))) {
      return {RecvStatus::Timeout, {}};
    }
    if (!detail::read_into(fd_, buffer_)) {
      eof_ = true;
    }
  }
}

void SocketConnection::close() {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
  detail::close_fd(fd_);
}

TcpListener::TcpListener(std::uint16_t port, const std::string& host) : fd_(-1), port_(0) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) {
    throw IoError(std::string("socket: ") + std::strerror(errno));
  }
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    detail::close_fd(fd_);
    throw InvalidParams("bad listen address '" + host + "'");
  }
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(fd_, 16) != 0) {
    const std::string why = std::strerror(errno);
    detail::close_fd(fd_);
    throw IoError("cannot listen on " + host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { detail::close_fd(fd_); }

std::unique_ptr<LineConnection> TcpListener::accept(std::chrono::milliseconds timeout) {
  if (!detail::wait_readable(fd_, timeout)) {
    return nullptr;
  }
  int fd = ::accept(fd_, nullptr, nullptr);
  if (fd < 0) {
    throw IoError(std::string("accept: ") + std::strerror(errno));
  }
  set_nodelay(fd);
  const std::string prefix = peek_prefix(fd, 4, std::chrono::milliseconds(5000));
  if (prefix == "GET ") {
    try {
      std::string pending = websocket_server_handshake(fd, std::chrono::milliseconds(5000));
      return std::make_unique<WebSocketConnection>(fd, WebSocketConnection::Role::Server, std::move(pending));
    } catch (...) {
      detail::close_fd(fd);
      throw;
    }
  }
  return std::make_unique<SocketConnection>(fd);
}

int detail::open_client_socket(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (const int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw IoError("cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    detail::close_fd(fd);
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw IoError("cannot connect to " + host + ":" + service);
  }
  set_nodelay(fd);
  return fd;
}

std::pair<std::unique_ptr<LineConnection>, std::unique_ptr<LineConnection>> connection_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    throw IoError(std::string("socketpair: ") + std::strerror(errno));
  }
  return {std::make_unique<SocketConnection>(fds[0]), std::make_unique<SocketConnection>(fds[1])};
}

std::unique_ptr<LineConnection> connect_tcp(const std::string& host, std::uint16_t port) {
  return std::make_unique<SocketConnection>(detail::open_client_socket(host, port));
}

}  // namespace handpan::service
