#include "handpan/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace handpan::config {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::int64_t integer(std::string_view key, std::string_view value) {
  std::int64_t v = 0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || res.ec != std::errc{} || res.ptr != value.data() + value.size()) {
    throw InvalidParams("'" + std::string(key) + "' expects an integer, got '" + std::string(value) + "'");
  }
  return v;
}

double real(std::string_view key, std::string_view value) {
  double v = 0.0;
  const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || res.ec != std::errc{} || res.ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw InvalidParams("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  }
  return v;
}

layouts::Palette palette(std::string_view value) {
  layouts::Palette out{};
  std::size_t i = 0;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = value.find(',', pos);
    const auto item = trim(value.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (i == out.size()) {
      throw InvalidParams("palette needs exactly 8 colors");
    }
    out[i++] = layouts::parse_hex(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (i != out.size()) {
    throw InvalidParams("palette needs exactly 8 colors");
  }
  return out;
}

}  // namespace

void set_value(Config& config, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "window_ms") {
    config.window_ms = integer(key, value);
  } else if (key == "scroll_speed_mps") {
    config.scroll_speed_mps = real(key, value);
  } else if (key == "highway_length_m") {
    config.highway_length_m = real(key, value);
  } else if (key == "serial_baud") {
    config.serial.baud = static_cast<int>(integer(key, value));
  } else if (key == "serial_framing") {
    sensor::parse_framing(value, config.serial);
  } else if (key == "palette") {
    config.palette = palette(value);
  } else if (key == "pose_calibration_threshold") {
    config.pose_calibration_threshold = static_cast<int>(integer(key, value));
  } else if (key == "session_calibration_threshold") {
    config.session_calibration_threshold = static_cast<int>(integer(key, value));
  } else if (key == "commit_grace_ms") {
    config.commit_grace_ms = integer(key, value);
  } else if (key == "lead_in_ms") {
    config.lead_in_ms = integer(key, value);
  } else if (key == "latency_compensation_ms") {
    config.latency_compensation_ms = integer(key, value);
  } else {
    throw InvalidParams("unknown key '" + std::string(key) + "'");
  }
}

void validate_config(const Config& c) {
  if (c.window_ms <= 0) throw InvalidParams("window_ms must be positive");
  if (!(c.scroll_speed_mps > 0.0)) throw InvalidParams("scroll_speed_mps must be positive");
  if (!(c.highway_length_m > 0.0)) throw InvalidParams("highway_length_m must be positive");
  if (c.serial.baud <= 0) throw InvalidParams("serial_baud must be positive");
  if (c.commit_grace_ms < 0 || c.lead_in_ms < 0) {
    throw InvalidParams("commit_grace_ms and lead_in_ms must be non-negative");
  }
  for (int t : {c.pose_calibration_threshold, c.session_calibration_threshold}) {
    if (t < 0 || t > 3) throw InvalidParams("calibration thresholds must lie in 0..3");
  }
  std::set<std::string> seen;
  for (const auto& color : c.palette) {
    if (!seen.insert(layouts::to_hex(color)).second) {
      throw InvalidParams("palette colors must be distinct");
    }
  }
}

Config parse_config(std::string_view text, Config base) {
  std::set<std::string, std::less<>> keys;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(line_no, "expected 'key = value'");
    }
    const std::string_view key = trim(line.substr(0, eq));
    if (!keys.insert(std::string(key)).second) {
      throw ConfigError(line_no, "duplicate key '" + std::string(key) + "'");
    }
    try {
      set_value(base, key, line.substr(eq + 1));
    } catch (const InvalidParams& e) {
      throw ConfigError(line_no, e.what());
    }
  }
  try {
    validate_config(base);
  } catch (const InvalidParams& e) {
    throw ConfigError(line_no, e.what());
  }
  return base;
}

Config load_config(const std::filesystem::path& path, Config base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open config " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

std::optional<std::filesystem::path> config_path(const std::optional<std::string>& explicit_path) {
  if (explicit_path && !explicit_path->empty()) return std::filesystem::path(*explicit_path);
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

}  // namespace handpan::config
