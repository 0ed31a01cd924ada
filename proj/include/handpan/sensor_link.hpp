#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "handpan/sensor.hpp"

namespace handpan::sensor {

/// Fixed-capacity FIFO handing items from one producer thread to consumers.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

  // Blocks while full. Returns false once the queue is closed.
  bool push(T item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) {
      return false;
    }
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  // Waits up to `timeout`; nullopt on timeout or when closed and drained.
  std::optional<T> pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mutex_);
    if (!not_empty_.wait_for(lock, timeout, [&] { return closed_ || !items_.empty(); }) || items_.empty()) {
      return std::nullopt;
    }
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  bool closed_and_empty() const {
    std::lock_guard lock(mutex_);
    return closed_ && items_.empty();
  }

 private:
  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  bool closed_ = false;
};

/// Byte stream to or from the tracker: a serial device (configured with
/// termios when the path is a tty) or a plain file used for replay.
class SerialPort {
 public:
  enum class Mode { Read, Write };

  SerialPort(const std::filesystem::path& path, const SerialConfig& config, Mode mode);
  ~SerialPort();
  SerialPort(const SerialPort&) = delete;
  SerialPort& operator=(const SerialPort&) = delete;

  bool is_tty() const { return tty_; }

  /// Next newline-terminated line including the '\n', or nullopt at end of stream.
  std::optional<std::string> read_line();
  void write(std::string_view bytes);

 private:
  int fd_ = -1;
  bool tty_ = false;
  std::string buffer_;
};

struct ReaderStats {
  std::uint64_t frames = 0;
  std::uint64_t rejected = 0;
};

/// Single producer: decodes sentences from a port and pushes frames into a
/// bounded queue, stamping each with `clock()`. Undecodable lines are counted
/// and skipped. The queue is closed at end of stream.
class FrameReader {
 public:
  using Clock = std::function<std::int64_t()>;

  FrameReader(SerialPort& port, BoundedQueue<OrientationFrame>& queue, Clock clock);
  ~FrameReader();
  FrameReader(const FrameReader&) = delete;
  FrameReader& operator=(const FrameReader&) = delete;

  void join();
  ReaderStats stats() const { return {frames_.load(), rejected_.load()}; }

 private:
  void run();

  SerialPort& port_;
  BoundedQueue<OrientationFrame>& queue_;
  Clock clock_;
  std::atomic<std::uint64_t> frames_{0};
  std::atomic<std::uint64_t> rejected_{0};
  std::thread thread_;
};

}  // namespace handpan::sensor
