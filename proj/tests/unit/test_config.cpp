#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "handpan/config.hpp"

using namespace handpan;
using namespace handpan::config;

namespace {

std::size_t error_line(std::string_view text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("defaults and a full file") {
  const Config d;
  CHECK(d.window_ms == 150);
  CHECK(d.serial.baud == 9600);

  const auto c = parse_config(
      "# trainer settings\n"
      "window_ms = 120\n"
      "\n"
      "scroll_speed_mps=0.9\n"
      "serial_baud = 115200\n"
      "serial_framing = 7E2\n"
      "commit_grace_ms = 300\n"
      "latency_compensation_ms = -15\n"
      "palette = #000001,#000002,#000003,#000004,#000005,#000006,#000007,#000008\n");
  CHECK(c.window_ms == 120);
  CHECK(c.scroll_speed_mps == 0.9);
  CHECK(c.serial.baud == 115200);
  CHECK(c.serial.data_bits == 7);
  CHECK(c.serial.stop_bits == 2);
  CHECK(c.commit_grace_ms == 300);
  CHECK(c.latency_compensation_ms == -15);
  CHECK(layouts::to_hex(c.palette[7]) == "#000008");
  CHECK(c.highway_length_m == d.highway_length_m);
}

TEST_CASE("errors name the offending line") {
  CHECK(error_line("window_ms = 100\nnope = 1\n") == 2);
  CHECK(error_line("window_ms = 100\nwindow_ms = 90\n") == 2);
  CHECK(error_line("# c\nwindow_ms\n") == 2);
  CHECK(error_line("window_ms = 0\n") == 1);
  CHECK(error_line("window_ms = 1x\n") == 1);
  CHECK(error_line("pose_calibration_threshold = 4\n") == 1);
  CHECK(error_line("palette = #000001\n") == 1);
  CHECK(error_line("palette = #000001,#000001,#000003,#000004,#000005,#000006,#000007,#000008\n") == 1);
}

TEST_CASE("set_value and validation") {
  Config c;
  set_value(c, "lead_in_ms", "0");
  CHECK(c.lead_in_ms == 0);
  set_value(c, "lead_in_ms", "-1");
  CHECK_THROWS_AS(validate_config(c), InvalidParams);
  CHECK(error_line("lead_in_ms = -1\n") > 0);
  c = {};
  CHECK_THROWS_AS(set_value(c, "bogus", "1"), InvalidParams);
  c.scroll_speed_mps = -1.0;
  CHECK_THROWS_AS(validate_config(c), InvalidParams);
}

TEST_CASE("config files and the path lookup") {
  const auto path = std::filesystem::temp_directory_path() / "handpan_config_test.conf";
  {
    std::ofstream out(path);
    out << "window_ms = 99\n";
  }
  CHECK(load_config(path).window_ms == 99);
  CHECK_THROWS_AS(load_config(path.string() + ".missing"), IoError);

  ::setenv(kConfigEnv, path.c_str(), 1);
  CHECK(config_path(std::nullopt) == path);
  CHECK(config_path(std::string("/x.conf")) == std::filesystem::path("/x.conf"));
  ::unsetenv(kConfigEnv);
  CHECK_FALSE(config_path(std::nullopt));
  std::filesystem::remove(path);
}
