#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "handpan/error.hpp"
#include "handpan/geometry.hpp"
#include "handpan/layouts.hpp"

namespace handpan::sensor {

/// Per-sensor fusion confidence, 0 (uncalibrated) to 3 (fully calibrated).
struct Calibration {
  int system = 0;
  int gyro = 0;
  int accel = 0;
  int mag = 0;

  friend bool operator==(const Calibration&, const Calibration&) = default;
};

struct OrientationFrame {
  std::uint32_t seq = 0;
  Quat q;
  Vec3 accel;  // m/s^2, sensor frame
  Calibration cal;
  std::int64_t t_rx_ms = 0;

  friend bool operator==(const OrientationFrame&, const OrientationFrame&) = default;
};

enum class CommandKind { Reset };

struct DeviceCommand {
  CommandKind kind = CommandKind::Reset;
};

// ---------------------------------------------------------------------------
// Wire codec
//
//   $OTR,<seq>,<qw>,<qx>,<qy>,<qz>,<ax>,<ay>,<az>,<cs>,<cg>,<ca>,<cm>*HH\n
//   $CMD,RESET*HH\n
//
// Reals carry exactly four decimals. HH is the uppercase hex XOR of every byte
// strictly between '$' and '*'.
// ---------------------------------------------------------------------------

enum class DecodeErrorKind { BadChecksum, BadFieldCount, BadNumber, UnknownSentence };

std::string_view decode_error_name(DecodeErrorKind kind);

class DecodeError : public Error {
 public:
  DecodeError(DecodeErrorKind kind, const std::string& detail);
  DecodeErrorKind kind() const { return kind_; }

 private:
  DecodeErrorKind kind_;
};

std::uint8_t checksum(std::string_view payload);

std::string encode_frame(const OrientationFrame& frame);

/// Parses one sentence (trailing "\n" or "\r\n" optional). The quaternion is
/// renormalized unless it is already unit length to wire precision (1e-3), so
/// canonical lines re-encode byte-identically. t_rx_ms is set from `t_rx_ms`.
OrientationFrame decode_frame(std::string_view line, std::int64_t t_rx_ms = 0);

std::string encode_command(const DeviceCommand& command);
DeviceCommand decode_command(std::string_view line);

// ---------------------------------------------------------------------------
// Serial link budget
// ---------------------------------------------------------------------------

enum class Parity { None, Even, Odd };

struct SerialConfig {
  int baud = 9600;
  int data_bits = 8;
  Parity parity = Parity::None;
  int stop_bits = 1;
};

/// Parses "8N1"-style framing into `config`; throws InvalidParams.
void parse_framing(std::string_view text, SerialConfig& config);
std::string framing_name(const SerialConfig& config);

/// Bits on the wire per byte: start + data + parity + stop.
int bits_per_byte(const SerialConfig& config);
double bytes_per_second(const SerialConfig& config);
/// Highest frame rate the link sustains for sentences of `line_bytes` bytes.
double max_frame_rate_hz(const SerialConfig& config, std::size_t line_bytes);
bool fits_link(const SerialConfig& config, std::size_t line_bytes, double rate_hz);

// ---------------------------------------------------------------------------
// Device simulator
// ---------------------------------------------------------------------------

enum class MotionProfile { Still, SlowTilt, Drifty };

std::string_view profile_name(MotionProfile profile);
MotionProfile parse_profile(std::string_view name);

inline constexpr double kGravity = 9.80665;
inline constexpr double kSlowTiltAmplitudeDeg = 15.0;
inline constexpr double kSlowTiltFrequencyHz = 0.2;
inline constexpr std::int64_t kCalibrationRampMs = 2000;

struct SimState {
  MotionProfile profile = MotionProfile::Still;
  double rate_hz = 50.0;
  std::uint64_t frame_index = 0;     // frames emitted so far
  std::uint32_t next_seq = 0;
  double motion_origin_ms = 0.0;      // device time at which the motion profile restarts
  double yaw_rad = 0.0;               // Drifty random walk
  std::mt19937_64 rng;

  friend bool operator==(const SimState&, const SimState&) = default;
};

/// Throws InvalidParams when rate_hz <= 0.
SimState make_simulator(MotionProfile profile, double rate_hz, std::uint64_t seed, std::uint32_t first_seq = 0);

/// Device time of the next frame, in ms since power-on.
double next_frame_time_ms(const SimState& state);

/// Emits the next frame and advances the state.
OrientationFrame next_frame(SimState& state);

/// RESET restarts the motion profile at the next frame (orientation returns
/// to identity) and clears the drift; seq keeps counting.
SimState handle_command(const DeviceCommand& command, SimState state);

/// floor(duration_ms * rate_hz / 1000) frames from a fresh simulator.
std::vector<OrientationFrame> simulate_device(MotionProfile profile, std::int64_t duration_ms, double rate_hz,
                                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Pose
// ---------------------------------------------------------------------------

inline constexpr int kPoseCalibrationThreshold = 1;
inline constexpr int kSessionCalibrationThreshold = 3;

class Uncalibrated : public Error {
 public:
  using Error::Error;
};

struct PosedModel {
  layouts::HandpanModel base;
  Quat rotation;
  std::array<Vec3, chart::kDimpleCount> centers;  // rotated dimple centers

  /// The base model with its dimple centers replaced by the rotated ones.
  layouts::HandpanModel as_model() const;
};

struct PoseOptions {
  int calibration_threshold = kPoseCalibrationThreshold;
  bool override_calibration = false;
};

/// Throws Uncalibrated when cal.system is below the threshold and no override is set.
PosedModel apply_pose(const layouts::HandpanModel& model, const OrientationFrame& frame,
                      const PoseOptions& options = {});

}  // namespace handpan::sensor
