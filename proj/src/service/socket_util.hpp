#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

namespace handpan::service::detail {

/// poll() for readability; false on timeout.
bool wait_readable(int fd, std::chrono::microseconds timeout);
/// Writes everything or throws ClientDisconnected.
void send_all(int fd, std::string_view data);
/// Appends up to one read's worth of bytes; returns false at EOF or error.
bool read_into(int fd, std::string& buffer);
void close_fd(int& fd);
/// Connected TCP socket with TCP_NODELAY set. Throws IoError.
int open_client_socket(const std::string& host, std::uint16_t port);

}  // namespace handpan::service::detail
