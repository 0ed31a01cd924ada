#include <charconv>
#include <cmath>
#include <cstdio>

#include "handpan/sensor.hpp"

namespace handpan::sensor {

namespace {

constexpr char kHex[] = "0123456789ABCDEF";

std::string fixed4(double v) {
  char buf[48];
  const int n = std::snprintf(buf, sizeof buf, "%.4f", v);
  return std::string(buf, static_cast<std::size_t>(n));
}

std::string seal(const std::string& payload) {
  const std::uint8_t cs = checksum(payload);
  std::string line = "$" + payload + "*";
  line += kHex[cs >> 4];
  line += kHex[cs & 0xF];
  line += '\n';
  return line;
}

int upper_hex(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

// Validates framing and checksum; returns the payload between '$' and '*'.
std::string_view open(std::string_view line) {
  if (line.size() >= 2 && line.substr(line.size() - 2) == "\r\n") {
    line.remove_suffix(2);
  } else if (!line.empty() && line.back() == '\n') {
    line.remove_suffix(1);
  }
  if (line.empty() || line.front() != '$') {
    throw DecodeError(DecodeErrorKind::UnknownSentence, "sentence must start with '$'");
  }
  const std::size_t star = line.rfind('*');
  if (star == std::string_view::npos || star + 3 != line.size()) {
    throw DecodeError(DecodeErrorKind::BadChecksum, "missing or malformed '*HH' trailer");
  }
  const int hi = upper_hex(line[star + 1]);
  const int lo = upper_hex(line[star + 2]);
  const std::string_view payload = line.substr(1, star - 1);
  if (hi < 0 || lo < 0 || checksum(payload) != static_cast<std::uint8_t>(hi * 16 + lo)) {
    throw DecodeError(DecodeErrorKind::BadChecksum, "checksum mismatch");
  }
  return payload;
}

std::vector<std::string_view> fields_of(std::string_view payload) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = payload.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(payload.substr(pos));
      return fields;
    }
    fields.push_back(payload.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

// -?D+.DDDD
double fixed4_field(std::string_view token) {
  std::string_view body = token;
  if (!body.empty() && body.front() == '-') {
    body.remove_prefix(1);
  }
  const std::size_t dot = body.find('.');
  if (dot == std::string_view::npos || !all_digits(body.substr(0, dot)) || body.size() - dot - 1 != 4 ||
      !all_digits(body.substr(dot + 1))) {
    throw DecodeError(DecodeErrorKind::BadNumber, "expected fixed 4-decimal real, got '" + std::string(token) + "'");
  }
  double value = 0.0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw DecodeError(DecodeErrorKind::BadNumber, "bad real '" + std::string(token) + "'");
  }
  return value;
}

std::uint32_t seq_field(std::string_view token) {
  std::uint32_t value = 0;
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (!all_digits(token) || res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw DecodeError(DecodeErrorKind::BadNumber, "bad sequence number '" + std::string(token) + "'");
  }
  return value;
}

int cal_field(std::string_view token) {
  if (token.size() != 1 || token[0] < '0' || token[0] > '3') {
    throw DecodeError(DecodeErrorKind::BadNumber, "calibration must be 0..3, got '" + std::string(token) + "'");
  }
  return token[0] - '0';
}

}  // namespace

std::string_view decode_error_name(DecodeErrorKind kind) {
  switch (kind) {
    case DecodeErrorKind::BadChecksum: return "BadChecksum";
    case DecodeErrorKind::BadFieldCount: return "BadFieldCount";
    case DecodeErrorKind::BadNumber: return "BadNumber";
    case DecodeErrorKind::UnknownSentence: return "UnknownSentence";
  }
  return "Unknown";
}

DecodeError::DecodeError(DecodeErrorKind kind, const std::string& detail)
    : Error(std::string(decode_error_name(kind)) + ": " + detail), kind_(kind) {}

std::uint8_t checksum(std::string_view payload) {
  std::uint8_t x = 0;
  for (char c : payload) {
    x ^= static_cast<std::uint8_t>(c);
  }
  return x;
}

std::string encode_frame(const OrientationFrame& f) {
  std::string payload = "OTR," + std::to_string(f.seq);
  for (double v : {f.q.w, f.q.x, f.q.y, f.q.z, f.accel.x, f.accel.y, f.accel.z}) {
    payload += ',';
    payload += fixed4(v);
  }
  for (int c : {f.cal.system, f.cal.gyro, f.cal.accel, f.cal.mag}) {
    payload += ',';
    payload += std::to_string(c);
  }
  return seal(payload);
}

OrientationFrame decode_frame(std::string_view line, std::int64_t t_rx_ms) {
  const auto fields = fields_of(open(line));
  if (fields.front() != "OTR") {
    throw DecodeError(DecodeErrorKind::UnknownSentence, "unknown sentence '" + std::string(fields.front()) + "'");
  }
  if (fields.size() != 13) {
    throw DecodeError(DecodeErrorKind::BadFieldCount, "expected 13 fields, got " + std::to_string(fields.size()));
  }
  OrientationFrame f;
  f.seq = seq_field(fields[1]);
  f.q = {fixed4_field(fields[2]), fixed4_field(fields[3]), fixed4_field(fields[4]), fixed4_field(fields[5])};
  f.accel = {fixed4_field(fields[6]), fixed4_field(fields[7]), fixed4_field(fields[8])};
  f.cal = {cal_field(fields[9]), cal_field(fields[10]), cal_field(fields[11]), cal_field(fields[12])};
  f.t_rx_ms = t_rx_ms;

  const double n = norm(f.q);
  if (!(n > 1e-6)) {
    throw DecodeError(DecodeErrorKind::BadNumber, "zero quaternion");
  }
  if (std::abs(n - 1.0) > 1e-3) {
    f.q = normalized(f.q);
  }
  return f;
}

std::string encode_command(const DeviceCommand& command) {
  switch (command.kind) {
    case CommandKind::Reset: return seal("CMD,RESET");
  }
  return seal("CMD,RESET");
}

DeviceCommand decode_command(std::string_view line) {
  const auto fields = fields_of(open(line));
  if (fields.front() != "CMD") {
    throw DecodeError(DecodeErrorKind::UnknownSentence, "unknown sentence '" + std::string(fields.front()) + "'");
  }
  if (fields.size() != 2) {
    throw DecodeError(DecodeErrorKind::BadFieldCount, "expected 2 fields, got " + std::to_string(fields.size()));
  }
  if (fields[1] != "RESET") {
    throw DecodeError(DecodeErrorKind::UnknownSentence, "unknown command '" + std::string(fields[1]) + "'");
  }
  return DeviceCommand{CommandKind::Reset};
}

// ---------------------------------------------------------------------------

void parse_framing(std::string_view text, SerialConfig& config) {
  if (text.size() != 3 || text[0] < '5' || text[0] > '8' || (text[2] != '1' && text[2] != '2')) {
    throw InvalidParams("serial framing must look like 8N1, got '" + std::string(text) + "'");
  }
  Parity parity{};
  switch (text[1]) {
    case 'N': parity = Parity::None; break;
    case 'E': parity = Parity::Even; break;
    case 'O': parity = Parity::Odd; break;
    default: throw InvalidParams("serial parity must be N, E or O");
  }
  config.data_bits = text[0] - '0';
  config.parity = parity;
  config.stop_bits = text[2] - '0';
}

std::string framing_name(const SerialConfig& config) {
  const char parity = config.parity == Parity::None ? 'N' : (config.parity == Parity::Even ? 'E' : 'O');
  return std::to_string(config.data_bits) + parity + std::to_string(config.stop_bits);
}

int bits_per_byte(const SerialConfig& config) {
  return 1 + config.data_bits + (config.parity == Parity::None ? 0 : 1) + config.stop_bits;
}

double bytes_per_second(const SerialConfig& config) {
  return static_cast<double>(config.baud) / bits_per_byte(config);
}

double max_frame_rate_hz(const SerialConfig& config, std::size_t line_bytes) {
  return line_bytes == 0 ? 0.0 : bytes_per_second(config) / static_cast<double>(line_bytes);
}

bool fits_link(const SerialConfig& config, std::size_t line_bytes, double rate_hz) {
  return rate_hz * static_cast<double>(line_bytes) <= bytes_per_second(config);
}

}  // namespace handpan::sensor
