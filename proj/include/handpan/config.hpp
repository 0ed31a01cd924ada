#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "handpan/error.hpp"
#include "handpan/judge.hpp"
#include "handpan/layouts.hpp"
#include "handpan/sensor.hpp"

namespace handpan::config {

class ConfigError : public Error {
 public:
  ConfigError(std::size_t line, const std::string& reason)
      : Error("config line " + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct Config {
  std::int64_t window_ms = judge::kDefaultWindowMs;
  double scroll_speed_mps = 0.6;
  double highway_length_m = 1.2;
  sensor::SerialConfig serial;
  layouts::Palette palette = layouts::default_palette();
  int pose_calibration_threshold = sensor::kPoseCalibrationThreshold;
  int session_calibration_threshold = sensor::kSessionCalibrationThreshold;
  std::int64_t commit_grace_ms = 150;
  std::int64_t lead_in_ms = 1000;
  std::int64_t latency_compensation_ms = 0;
};

/// Environment variable naming the config file when --config is absent.
inline constexpr const char* kConfigEnv = "HANDPAN_CONFIG";

/// Flat `key = value` lines; `#` starts a comment line. Keys:
///   window_ms, scroll_speed_mps, highway_length_m, serial_baud,
///   serial_framing (e.g. 8N1), palette (eight comma-separated #RRGGBB),
///   pose_calibration_threshold, session_calibration_threshold,
///   commit_grace_ms, lead_in_ms, latency_compensation_ms.
/// Throws ConfigError for unknown keys, duplicates and invalid values.
Config parse_config(std::string_view text, Config base = {});
Config load_config(const std::filesystem::path& path, Config base = {});

/// Validates positivity, calibration ranges (0..3) and palette distinctness.
void validate_config(const Config& config);

/// Parses one value for `key` into `config` (the same rules as the file).
/// Throws InvalidParams.
void set_value(Config& config, std::string_view key, std::string_view value);

/// `explicit_path` wins over the environment variable; nullopt when neither is set.
std::optional<std::filesystem::path> config_path(const std::optional<std::string>& explicit_path);

}  // namespace handpan::config
