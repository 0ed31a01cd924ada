#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "handpan/layouts.hpp"

namespace handpan::layouts {

namespace {

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string to_hex(Rgb color) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out = "#";
  for (std::uint8_t v : {color.r, color.g, color.b}) {
    out += kDigits[v >> 4];
    out += kDigits[v & 0xF];
  }
  return out;
}

Rgb parse_hex(std::string_view text) {
  if (!text.empty() && text.front() == '#') {
    text.remove_prefix(1);
  }
  if (text.size() != 6) {
    throw InvalidParams("color must be #RRGGBB: '" + std::string(text) + "'");
  }
  std::array<std::uint8_t, 3> channels{};
  for (std::size_t i = 0; i < 3; ++i) {
    const int hi = hex_digit(text[2 * i]);
    const int lo = hex_digit(text[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw InvalidParams("color must be #RRGGBB: '" + std::string(text) + "'");
    }
    channels[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return {channels[0], channels[1], channels[2]};
}

Palette default_palette() {
  return {Rgb{0xFF, 0x00, 0x00}, Rgb{0xFF, 0x80, 0x00}, Rgb{0xFF, 0xFF, 0x00}, Rgb{0x00, 0xC0, 0x00},
          Rgb{0x00, 0xFF, 0xFF}, Rgb{0x00, 0x00, 0xFF}, Rgb{0x80, 0x00, 0xFF}, Rgb{0xFF, 0x00, 0xFF}};
}

HandpanModel handpan_model(const HandpanParams& params) {
  if (!(params.body_radius_m > 0.0) || !(params.dimple_radius_m > 0.0)) {
    throw InvalidParams("handpan radii must be positive");
  }
  if (params.dimple_radius_m >= params.body_radius_m) {
    throw InvalidParams("dimple radius must be smaller than body radius");
  }
  if (!(params.rim_radius_factor > 0.0) || params.rim_radius_factor > 1.0) {
    throw InvalidParams("rim radius factor must be in (0, 1]");
  }
  auto order = params.rim_order;
  std::sort(order.begin(), order.end());
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] != static_cast<int>(i) + 1) {
      throw InvalidParams("rim order must be a permutation of 1..7");
    }
  }
  std::set<std::array<std::uint8_t, 3>> colors;
  for (const auto& c : params.palette) {
    if (!colors.insert({c.r, c.g, c.b}).second) {
      throw InvalidParams("palette colors must be pairwise distinct");
    }
  }

  HandpanModel model;
  model.body_radius_m = params.body_radius_m;
  for (int i = 0; i < chart::kDimpleCount; ++i) {
    auto& d = model.dimples[static_cast<std::size_t>(i)];
    d.index = i;
    d.radius_m = params.dimple_radius_m;
    d.pitch_name = std::string(kDIntegral[static_cast<std::size_t>(i)]);
    d.color = params.palette[static_cast<std::size_t>(i)];
  }
  const double rim = params.rim_radius_factor * params.body_radius_m;
  const double step = 2.0 * std::numbers::pi / static_cast<double>(params.rim_order.size());
  for (std::size_t slot = 0; slot < params.rim_order.size(); ++slot) {
    const double angle = -std::numbers::pi / 2.0 + step * static_cast<double>(slot);
    auto& d = model.dimples[static_cast<std::size_t>(params.rim_order[slot])];
    d.center = {rim * std::cos(angle), rim * std::sin(angle), 0.0};
  }
  // cos(-pi/2) is not exactly zero in floating point.
  model.dimples[static_cast<std::size_t>(params.rim_order[0])].center = {0.0, -rim, 0.0};
  return model;
}

HandpanModel handpan_model(double body_radius_m, double dimple_radius_m) {
  HandpanParams params;
  params.body_radius_m = body_radius_m;
  params.dimple_radius_m = dimple_radius_m;
  return handpan_model(params);
}

int midi_number(std::string_view name) {
  static constexpr std::array<int, 7> kLetterSemitone = {9, 11, 0, 2, 4, 5, 7};  // A B C D E F G
  const std::string original(name);
  if (name.size() < 2) {
    throw UnknownPitch("unknown pitch '" + original + "'");
  }
  const char letter = name.front();
  if (letter < 'A' || letter > 'G') {
    throw UnknownPitch("unknown pitch '" + original + "'");
  }
  int semitone = kLetterSemitone[static_cast<std::size_t>(letter - 'A')];
  name.remove_prefix(1);
  if (name.front() == '#') {
    ++semitone;
    name.remove_prefix(1);
  } else if (name.front() == 'b') {
    --semitone;
    name.remove_prefix(1);
  }
  if (name.size() != 1 || name.front() < '0' || name.front() > '8') {
    throw UnknownPitch("unknown pitch '" + original + "'");
  }
  const int octave = name.front() - '0';
  const int midi = 12 * (octave + 1) + semitone;
  if (midi < 21 || midi > 108) {
    throw UnknownPitch("pitch '" + original + "' outside A0..C8");
  }
  return midi;
}

double pitch_frequency(std::string_view pitch_name) {
  const int m = midi_number(pitch_name);
  return 440.0 * std::pow(2.0, static_cast<double>(m - 69) / 12.0);
}

}  // namespace handpan::layouts
