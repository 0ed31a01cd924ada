#include "handpan/sensor_link.hpp"

#include <fcntl.h>
#include <termios.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace handpan::sensor {

namespace {

speed_t baud_constant(int baud) {
  switch (baud) {
    case 1200: return B1200;
    case 2400: return B2400;
    case 4800: return B4800;
    case 9600: return B9600;
    case 19200: return B19200;
    case 38400: return B38400;
    case 57600: return B57600;
    case 115200: return B115200;
    case 230400: return B230400;
    default: throw InvalidParams("unsupported baud rate " + std::to_string(baud));
  }
}

void configure_tty(int fd, const SerialConfig& config) {
  termios tio{};
  if (tcgetattr(fd, &tio) != 0) {
    throw IoError(std::string("tcgetattr: ") + std::strerror(errno));
  }
  cfmakeraw(&tio);
  const speed_t speed = baud_constant(config.baud);
  cfsetispeed(&tio, speed);
  cfsetospeed(&tio, speed);
  tio.c_cflag &= ~static_cast<tcflag_t>(CSIZE | PARENB | PARODD | CSTOPB);
  switch (config.data_bits) {
    case 5: tio.c_cflag |= CS5; break;
    case 6: tio.c_cflag |= CS6; break;
    case 7: tio.c_cflag |= CS7; break;
    default: tio.c_cflag |= CS8; break;
  }
  if (config.parity != Parity::None) {
    tio.c_cflag |= PARENB;
    if (config.parity == Parity::Odd) {
      tio.c_cflag |= PARODD;
    }
  }
  if (config.stop_bits == 2) {
    tio.c_cflag |= CSTOPB;
  }
  tio.c_cflag |= CLOCAL | CREAD;
  tio.c_cc[VMIN] = 1;
  tio.c_cc[VTIME] = 0;
  if (tcsetattr(fd, TCSANOW, &tio) != 0) {
    throw IoError(std::string("tcsetattr: ") + std::strerror(errno));
  }
}

}  // namespace

SerialPort::SerialPort(const std::filesystem::path& path, const SerialConfig& config, Mode mode) {
  const int flags = mode == Mode::Read ? O_RDONLY : (O_WRONLY | O_CREAT | O_TRUNC);
  fd_ = ::open(path.c_str(), flags | O_CLOEXEC | O_NOCTTY, 0644);
  if (fd_ < 0) {
    throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  }
  tty_ = ::isatty(fd_) == 1;
  if (tty_) {
    try {
      configure_tty(fd_, config);
    } catch (...) {
      ::close(fd_);
      throw;
    }
  }
}

SerialPort::~SerialPort() {
  if (fd_ >= 0) {
    ::close(fd_);
  }
}

std::optional<std::string> SerialPort::read_line() {
  while (true) {
    const std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl + 1);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[512];
    const ssize_t n = ::read(fd_, chunk, sizeof chunk);
    if (n < 0 && errno == EINTR) {
      continue;
    }
    if (n <= 0) {
      if (buffer_.empty()) {
        return std::nullopt;
      }
      std::string rest = std::move(buffer_);
      buffer_.clear();
      return rest;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void SerialPort::write(std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd_, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) {
        continue;
      }
      throw IoError(std::string("write: ") + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

FrameReader::FrameReader(SerialPort& port, BoundedQueue<OrientationFrame>& queue, Clock clock)
    : port_(port), queue_(queue), clock_(std::move(clock)), thread_([this] { run(); }) {}

FrameReader::~FrameReader() { join(); }

void FrameReader::join() {
  if (thread_.joinable()) {
    thread_.join();
  }
}

void FrameReader::run() {
  while (auto line = port_.read_line()) {
    try {
      auto frame = decode_frame(*line, clock_());
      ++frames_;
      if (!queue_.push(std::move(frame))) {
        break;
      }
    } catch (const DecodeError&) {
      ++rejected_;
    }
  }
  queue_.close();
}

}  // namespace handpan::sensor
