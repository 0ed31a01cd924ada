#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "handpan/layouts.hpp"
#include "handpan/sensor.hpp"
#include "handpan/sensor_link.hpp"

using namespace handpan;
using namespace handpan::sensor;

namespace {

// Random frame whose fields are exactly representable at four decimals.
OrientationFrame random_frame(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_int_distribution<int> accel(-200000, 200000);
  std::uniform_int_distribution<int> cal(0, 3);
  OrientationFrame f;
  f.seq = static_cast<std::uint32_t>(rng());
  Quat q{g(rng), g(rng), g(rng), g(rng)};
  const double n = std::sqrt(q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z);
  const auto grid = [](double v) { return std::round(v * 10000.0) / 10000.0; };
  f.q = {grid(q.w / n), grid(q.x / n), grid(q.y / n), grid(q.z / n)};
  f.accel = {accel(rng) / 10000.0, accel(rng) / 10000.0, accel(rng) / 10000.0};
  f.cal = {cal(rng), cal(rng), cal(rng), cal(rng)};
  return f;
}

std::uint8_t xor_of(std::string_view s) {
  std::uint8_t x = 0;
  for (unsigned char c : s) x ^= c;
  return x;
}

DecodeErrorKind error_kind(std::string_view line) {
  try {
    decode_frame(line);
  } catch (const DecodeError& e) {
    return e.kind();
  }
  FAIL("line decoded: " << line);
  return DecodeErrorKind::BadChecksum;
}

}  // namespace

TEST_CASE("identity frame encodes to the documented sentence") {
  OrientationFrame f;
  f.cal = {3, 3, 3, 3};
  const std::string body = "OTR,0,1.0000,0.0000,0.0000,0.0000,0.0000,0.0000,0.0000,3,3,3,3";
  char hh[3];
  std::snprintf(hh, sizeof hh, "%02X", xor_of(body));
  CHECK(encode_frame(f) == "$" + body + "*" + hh + "\n");
  CHECK(checksum(body) == xor_of(body));
}

TEST_CASE("frames differing only in seq have self-consistent checksums") {
  OrientationFrame a;
  OrientationFrame b;
  b.seq = 1;
  CHECK(encode_frame(a) != encode_frame(b));
  CHECK(decode_frame(encode_frame(a)) == a);
  CHECK(decode_frame(encode_frame(b)) == b);
}

TEST_CASE("decode errors") {
  OrientationFrame f;
  f.seq = 12;
  std::string line = encode_frame(f);
  line[line.size() - 2] = line[line.size() - 2] == '0' ? '1' : '0';
  CHECK(error_kind(line) == DecodeErrorKind::BadChecksum);

  const std::string xyz_body = "XYZ,1,2";
  char hh[3];
  std::snprintf(hh, sizeof hh, "%02X", xor_of(xyz_body));
  CHECK(error_kind("$" + xyz_body + "*" + hh) == DecodeErrorKind::UnknownSentence);

  const std::string short_body = "OTR,1,1.0000";
  std::snprintf(hh, sizeof hh, "%02X", xor_of(short_body));
  CHECK(error_kind("$" + short_body + "*" + hh) == DecodeErrorKind::BadFieldCount);

  const std::string zero_q = "OTR,1,0.0000,0.0000,0.0000,0.0000,0.0000,0.0000,0.0000,3,3,3,3";
  std::snprintf(hh, sizeof hh, "%02X", xor_of(zero_q));
  CHECK(error_kind("$" + zero_q + "*" + hh) == DecodeErrorKind::BadNumber);

  const std::string bad_cal = "OTR,1,1.0000,0.0000,0.0000,0.0000,0.0000,0.0000,0.0000,3,3,3,4";
  std::snprintf(hh, sizeof hh, "%02X", xor_of(bad_cal));
  CHECK(error_kind("$" + bad_cal + "*" + hh) == DecodeErrorKind::BadNumber);

  CHECK(error_kind("OTR,1*00") == DecodeErrorKind::UnknownSentence);
}

TEST_CASE("CRLF endings decode and non-unit quaternions are renormalized") {
  OrientationFrame f;
  f.seq = 5;
  std::string line = encode_frame(f);
  line.insert(line.size() - 1, "\r");
  CHECK(decode_frame(line, 42).t_rx_ms == 42);

  const std::string body = "OTR,1,2.0000,0.0000,0.0000,0.0000,0.0000,0.0000,0.0000,3,3,3,3";
  char hh[3];
  std::snprintf(hh, sizeof hh, "%02X", xor_of(body));
  const auto g = decode_frame("$" + body + "*" + hh);
  CHECK(g.q.w == doctest::Approx(1.0));
}

TEST_CASE("property: 10000 random frames round trip, and canonical lines re-encode byte-identically") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    OrientationFrame f = random_frame(rng);
    f.t_rx_ms = i;
    const std::string line = encode_frame(f);
    const auto back = decode_frame(line, i);
    REQUIRE(back == f);
    CHECK(encode_frame(back) == line);
  }
}

TEST_CASE("property: every single-byte corruption is detected") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 40; ++i) {
    const std::string line = encode_frame(random_frame(rng));
    const std::size_t star = line.find('*');
    for (std::size_t pos = 1; pos < star + 3; ++pos) {
      for (int v = 0; v < 256; ++v) {
        if (static_cast<char>(v) == line[pos]) continue;
        std::string bad = line;
        bad[pos] = static_cast<char>(v);
        bool rejected = false;
        try {
          decode_frame(bad);
        } catch (const DecodeError&) {
          rejected = true;
        }
        REQUIRE_MESSAGE(rejected, "undetected corruption at " << pos << " -> " << v);
      }
    }
  }
}

TEST_CASE("commands") {
  const std::string reset = encode_command(DeviceCommand{});
  CHECK(reset.starts_with("$CMD,RESET*"));
  CHECK(decode_command(reset).kind == CommandKind::Reset);
  CHECK_THROWS_AS(decode_command("$CMD,RESET*00\n"), DecodeError);
}

TEST_CASE("serial budget: 9600 8N1 carries 960 bytes per second") {
  SerialConfig c;
  CHECK(bits_per_byte(c) == 10);
  CHECK(bytes_per_second(c) == doctest::Approx(960.0));
  OrientationFrame f;
  f.q = {-0.7071, -0.7071, 0.0, 0.0};
  f.accel = {-9.8066, -9.8066, -9.8066};
  const std::size_t bytes = encode_frame(f).size();
  CHECK(bytes >= 60);
  CHECK(bytes <= 90);
  CHECK(max_frame_rate_hz(c, bytes) == doctest::Approx(960.0 / static_cast<double>(bytes)));
  CHECK_FALSE(fits_link(c, bytes, 50.0));
  CHECK(fits_link(c, bytes, 10.0));
  c.baud = 115200;
  CHECK(fits_link(c, bytes, 50.0));

  parse_framing("7E2", c);
  CHECK(bits_per_byte(c) == 11);
  CHECK(framing_name(c) == "7E2");
  CHECK_THROWS_AS(parse_framing("9X1", c), InvalidParams);
}

TEST_CASE("STILL at 50 Hz for one second: 50 identity frames") {
  const auto frames = simulate_device(MotionProfile::Still, 1000, 50.0, 1);
  REQUIRE(frames.size() == 50);
  for (const auto& f : frames) {
    CHECK(f.q == Quat::identity());
    CHECK(f.accel.z == doctest::Approx(kGravity));
  }
}

TEST_CASE("seq increases strictly and streams are deterministic") {
  for (auto p : {MotionProfile::Still, MotionProfile::SlowTilt, MotionProfile::Drifty}) {
    const auto a = simulate_device(p, 3000, 50.0, 99);
    const auto b = simulate_device(p, 3000, 50.0, 99);
    REQUIRE(a.size() == 150);
    for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i].seq > a[i - 1].seq);
    std::string sa;
    std::string sb;
    for (const auto& f : a) sa += encode_frame(f);
    for (const auto& f : b) sb += encode_frame(f);
    CHECK(sa == sb);
  }
}

TEST_CASE("SLOW_TILT peaks at 15 degrees") {
  const auto frames = simulate_device(MotionProfile::SlowTilt, 10000, 100.0, 3);
  double peak = 0.0;
  for (const auto& f : frames) {
    const double w = std::min(1.0, std::abs(f.q.w) / norm(f.q));
    peak = std::max(peak, 2.0 * std::acos(w) * 180.0 / std::numbers::pi);
  }
  CHECK(std::abs(peak - 15.0) <= 0.1);
}

TEST_CASE("calibration ramps up to fully calibrated") {
  const auto frames = simulate_device(MotionProfile::Still, 3000, 10.0, 1);
  CHECK(frames.front().cal.system == 0);
  CHECK(frames.back().cal.system == 3);
  for (std::size_t i = 1; i < frames.size(); ++i) CHECK(frames[i].cal.system >= frames[i - 1].cal.system);
}

TEST_CASE("RESET: next frame is identity, idempotent, seq keeps counting") {
  auto s = make_simulator(MotionProfile::SlowTilt, 50.0, 5);
  std::vector<OrientationFrame> frames;
  for (int i = 0; i < 40; ++i) frames.push_back(next_frame(s));
  CHECK(frames.back().q != Quat::identity());

  const auto once = handle_command(DeviceCommand{}, s);
  const auto twice = handle_command(DeviceCommand{}, once);
  CHECK(once == twice);

  s = once;
  const auto after = next_frame(s);
  CHECK(after.q == Quat::identity());
  CHECK(after.seq == frames.back().seq + 1);
  CHECK(next_frame(s).q != Quat::identity());

  auto d = make_simulator(MotionProfile::Drifty, 50.0, 5);
  for (int i = 0; i < 100; ++i) next_frame(d);
  d = handle_command(DeviceCommand{}, d);
  CHECK(next_frame(d).q == Quat::identity());
}

TEST_CASE("pose: identity, 180 degree yaw, calibration gate") {
  const auto m = layouts::handpan_model();
  OrientationFrame f;
  f.cal = {3, 3, 3, 3};
  auto posed = apply_pose(m, f);
  for (std::size_t i = 0; i < 8; ++i) CHECK(posed.centers[i] == m.dimples[i].center);

  f.q = Quat::from_axis_angle({0.0, 0.0, 1.0}, std::numbers::pi);
  posed = apply_pose(m, f);
  const Vec3 c = m.dimples[1].center;
  CHECK(distance(posed.centers[1], Vec3{-c.x, -c.y, c.z}) <= 1e-12);
  CHECK(posed.as_model().dimples[1].center == posed.centers[1]);

  f.cal.system = 0;
  CHECK_THROWS_AS(apply_pose(m, f), Uncalibrated);
  CHECK_NOTHROW(apply_pose(m, f, PoseOptions{1, true}));
  f.cal.system = 2;
  CHECK_THROWS_AS(apply_pose(m, f, PoseOptions{kSessionCalibrationThreshold, false}), Uncalibrated);
}

TEST_CASE("property: pose preserves pairwise dimple distances") {
  const auto m = layouts::handpan_model();
  std::mt19937_64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    OrientationFrame f = random_frame(rng);
    f.cal.system = 3;
    const auto posed = apply_pose(m, f);
    for (std::size_t a = 0; a < 8; ++a) {
      for (std::size_t b = a + 1; b < 8; ++b) {
        CHECK(std::abs(distance(posed.centers[a], posed.centers[b]) -
                       distance(m.dimples[a].center, m.dimples[b].center)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("frame reader decodes a captured stream and counts rejects") {
  const auto path = std::filesystem::temp_directory_path() / "handpan_reader_test.txt";
  const auto frames = simulate_device(MotionProfile::Drifty, 1000, 20.0, 4);
  {
    std::ofstream out(path, std::ios::binary);
    for (std::size_t i = 0; i < frames.size(); ++i) {
      out << encode_frame(frames[i]);
      if (i == 3) out << "$garbage*00\n";
    }
  }
  SerialPort port(path, SerialConfig{}, SerialPort::Mode::Read);
  CHECK_FALSE(port.is_tty());
  BoundedQueue<OrientationFrame> queue(4);
  std::int64_t tick = 0;
  FrameReader reader(port, queue, [&] { return tick++; });
  std::vector<OrientationFrame> got;
  while (auto f = queue.pop(std::chrono::milliseconds(2000))) got.push_back(*f);
  reader.join();
  REQUIRE(got.size() == frames.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i].seq == frames[i].seq);
  CHECK(reader.stats().frames == frames.size());
  CHECK(reader.stats().rejected == 1);
  std::filesystem::remove(path);
}
