#include <cmath>
#include <numbers>

#include "handpan/sensor.hpp"

namespace handpan::sensor {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
// Drifty yaw diffuses at this many degrees per sqrt(second).
constexpr double kDriftDegPerSqrtSecond = 2.0;

int calibration_level(double device_ms) {
  if (device_ms <= 0.0) {
    return 0;
  }
  const auto level = static_cast<int>(std::floor(3.0 * device_ms / static_cast<double>(kCalibrationRampMs)));
  return level > 3 ? 3 : level;
}

}  // namespace

std::string_view profile_name(MotionProfile profile) {
  switch (profile) {
    case MotionProfile::Still: return "STILL";
    case MotionProfile::SlowTilt: return "SLOW_TILT";
    case MotionProfile::Drifty: return "DRIFTY";
  }
  return "UNKNOWN";
}

MotionProfile parse_profile(std::string_view name) {
  for (auto p : {MotionProfile::Still, MotionProfile::SlowTilt, MotionProfile::Drifty}) {
    if (profile_name(p) == name) {
      return p;
    }
  }
  throw InvalidParams("unknown motion profile '" + std::string(name) + "' (STILL, SLOW_TILT, DRIFTY)");
}

SimState make_simulator(MotionProfile profile, double rate_hz, std::uint64_t seed, std::uint32_t first_seq) {
  if (!(rate_hz > 0.0) || !std::isfinite(rate_hz)) {
    throw InvalidParams("rate_hz must be positive");
  }
  SimState state;
  state.profile = profile;
  state.rate_hz = rate_hz;
  state.next_seq = first_seq;
  state.rng.seed(seed);
  return state;
}

double next_frame_time_ms(const SimState& state) {
  return static_cast<double>(state.frame_index) * 1000.0 / state.rate_hz;
}

OrientationFrame next_frame(SimState& state) {
  const double device_ms = next_frame_time_ms(state);
  const double motion_s = (device_ms - state.motion_origin_ms) / 1000.0;

  Quat q = Quat::identity();
  switch (state.profile) {
    case MotionProfile::Still:
      break;
    case MotionProfile::SlowTilt: {
      const double tilt = kSlowTiltAmplitudeDeg * kDegToRad *
                          std::sin(2.0 * std::numbers::pi * kSlowTiltFrequencyHz * motion_s);
      q = Quat::from_axis_angle({1.0, 0.0, 0.0}, tilt);
      break;
    }
    case MotionProfile::Drifty: {
      q = Quat::from_axis_angle({0.0, 0.0, 1.0}, state.yaw_rad);
      std::normal_distribution<double> step(0.0, kDriftDegPerSqrtSecond * kDegToRad * std::sqrt(1.0 / state.rate_hz));
      state.yaw_rad += step(state.rng);
      break;
    }
  }

  OrientationFrame f;
  f.seq = state.next_seq++;
  f.q = q;
  f.accel = rotate(conjugate(q), Vec3{0.0, 0.0, kGravity});
  const int level = calibration_level(device_ms);
  f.cal = {level, level, level, level};
  f.t_rx_ms = std::llround(device_ms);
  ++state.frame_index;
  return f;
}

SimState handle_command(const DeviceCommand& command, SimState state) {
  switch (command.kind) {
    case CommandKind::Reset:
      state.motion_origin_ms = next_frame_time_ms(state);
      state.yaw_rad = 0.0;
      break;
  }
  return state;
}

std::vector<OrientationFrame> simulate_device(MotionProfile profile, std::int64_t duration_ms, double rate_hz,
                                              std::uint64_t seed) {
  if (duration_ms < 0) {
    throw InvalidParams("duration must be non-negative");
  }
  SimState state = make_simulator(profile, rate_hz, seed);
  const auto count = static_cast<std::size_t>(std::floor(static_cast<double>(duration_ms) * rate_hz / 1000.0 + 1e-9));
  std::vector<OrientationFrame> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    frames.push_back(next_frame(state));
  }
  return frames;
}

// ---------------------------------------------------------------------------

layouts::HandpanModel PosedModel::as_model() const {
  layouts::HandpanModel model = base;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    model.dimples[i].center = centers[i];
  }
  return model;
}

PosedModel apply_pose(const layouts::HandpanModel& model, const OrientationFrame& frame, const PoseOptions& options) {
  if (!options.override_calibration && frame.cal.system < options.calibration_threshold) {
    throw Uncalibrated("system calibration " + std::to_string(frame.cal.system) + " below threshold " +
                       std::to_string(options.calibration_threshold));
  }
  PosedModel posed;
  posed.base = model;
  posed.rotation = normalized(frame.q);
  for (std::size_t i = 0; i < model.dimples.size(); ++i) {
    posed.centers[i] = rotate(posed.rotation, model.dimples[i].center);
  }
  return posed;
}

}  // namespace handpan::sensor
