#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "handpan/chart.hpp"
#include "handpan/error.hpp"
#include "handpan/geometry.hpp"

namespace handpan::layouts {

// ---------------------------------------------------------------------------
// Instrument model
// ---------------------------------------------------------------------------

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// "#RRGGBB", uppercase.
std::string to_hex(Rgb color);
/// Accepts "#RRGGBB" or "RRGGBB"; throws InvalidParams otherwise.
Rgb parse_hex(std::string_view text);

using Palette = std::array<Rgb, chart::kDimpleCount>;

/// red, orange, yellow, green, cyan, blue, purple, magenta for dimples 0..7.
Palette default_palette();

/// Scale tones of the study instrument, ding first.
inline constexpr std::array<std::string_view, chart::kDimpleCount> kDIntegral = {"D3", "A3", "Bb3", "C4",
                                                                                 "D4", "E4", "F4",  "A4"};

struct Dimple {
  int index = 0;
  Vec3 center;  // meters, instrument frame; z is up, the player stands toward -y
  double radius_m = 0.0;
  std::string pitch_name;
  Rgb color;
};

struct HandpanModel {
  std::array<Dimple, chart::kDimpleCount> dimples;
  double body_radius_m = 0.0;
};

struct HandpanParams {
  double body_radius_m = 0.28;
  double dimple_radius_m = 0.05;
  double rim_radius_factor = 0.8;
  // rim_order[k] is the dimple placed at the k-th rim slot, counterclockwise from -90 degrees.
  std::array<int, chart::kDimpleCount - 1> rim_order = {1, 2, 3, 4, 5, 6, 7};
  Palette palette = default_palette();
};

/// Ding at the origin; rim dimples equally spaced on a circle of
/// rim_radius_factor * body radius starting nearest the player.
/// Throws InvalidParams for non-positive radii, dimple >= body radius,
/// a rim_order that is not a permutation of 1..7, or repeated colors.
HandpanModel handpan_model(const HandpanParams& params = {});
HandpanModel handpan_model(double body_radius_m, double dimple_radius_m);

class UnknownPitch : public Error {
 public:
  using Error::Error;
};

/// MIDI note number for a name like "Bb3", "C#4", "A0".."C8".
int midi_number(std::string_view pitch_name);

/// 12-TET frequency with A4 = 440 Hz.
double pitch_frequency(std::string_view pitch_name);

// ---------------------------------------------------------------------------
// Guidance interfaces
// ---------------------------------------------------------------------------

enum class InterfaceKind {
  StandardPath,
  HighlightedDimple,
  FourSplitPath,
  DirectCurvedPath,
  SemicircularTwoSplitPath,
  Video,
};

inline constexpr std::array<InterfaceKind, 6> kAllInterfaces = {
    InterfaceKind::StandardPath,     InterfaceKind::HighlightedDimple,        InterfaceKind::FourSplitPath,
    InterfaceKind::DirectCurvedPath, InterfaceKind::SemicircularTwoSplitPath, InterfaceKind::Video};

std::string_view kind_name(InterfaceKind kind);
/// Throws InvalidParams for unknown names.
InterfaceKind parse_kind(std::string_view name);

struct NotePath {
  int note_id = 0;
  int dimple = 0;
  std::int64_t onset_ms = 0;
  int lane = 0;   // path family; one per dimple
  int plane = 0;  // highway plane / column; -1 when the path has no plane
  std::vector<Vec3> points;
  std::vector<double> cumulative_m;  // arc length at each point, cumulative_m.front() == 0

  const Vec3& start() const { return points.front(); }
  const Vec3& endpoint() const { return points.back(); }
  double length_m() const { return cumulative_m.back(); }
};

/// One expanding-ring animation window for a highlighted dimple.
struct RingSchedule {
  int note_id = 0;
  double t0_ms = 0.0;  // onset - travel time
  double t1_ms = 0.0;  // onset
  double radius_m = 0.0;
};

struct LayoutParams {
  double scroll_speed_mps = 0.6;
  double highway_length_m = 1.2;
  double lane_gap_m = 0.1;
  double tunnel_size_m = 0.6;
  bool show_plane = true;  // HighlightedDimple only: draw the lane plane alongside the rings
  std::string media_ref = "media/handpan_lesson_{song}.mp4";
  int curve_samples = 32;
};

struct LayoutGeometry {
  InterfaceKind kind = InterfaceKind::StandardPath;
  std::vector<NotePath> note_paths;  // indexed by note id; empty for Video
  std::vector<RingSchedule> rings;   // HighlightedDimple only
  double travel_time_ms = 0.0;
  double scroll_speed_mps = 0.0;
  double highway_length_m = 0.0;
  bool show_plane = true;
  std::optional<std::string> media_ref;  // Video only
  HandpanModel model;
};

/// Throws InvalidParams for non-positive speed/length or an invalid chart.
LayoutGeometry build_layout(InterfaceKind kind, const HandpanModel& model, const chart::Chart& chart,
                            const LayoutParams& params = {});

class VideoHasNoPaths : public Error {
 public:
  VideoHasNoPaths() : Error("video layout has no note paths") {}
};

/// Position of a note along its path at time t_ms, or nullopt outside
/// [onset - travel_time, onset]. Exactly the path endpoint at t = onset.
std::optional<Vec3> note_position(const LayoutGeometry& layout, const chart::Note& note, double t_ms);

struct RingState {
  int note_id = 0;
  double outer_radius_m = 0.0;
  double inner_radius_m = 0.0;
  bool active = false;
};

/// Dual-ring animation: the outer ring sits at the dimple radius, the inner
/// ring grows linearly from the center and meets it at the onset.
RingState highlight_state(const HandpanModel& model, const chart::Note& note, double t_ms, double travel_time_ms);

/// Line-oriented text form consumed by clients (see README for the schema).
std::string serialize_layout(const LayoutGeometry& layout);

/// Inverse of serialize_layout. Throws InvalidParams on malformed input.
LayoutGeometry parse_layout(std::string_view blob);

}  // namespace handpan::layouts
