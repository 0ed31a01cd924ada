#include <algorithm>
#include <cmath>
#include <numbers>

#include "handpan/layouts.hpp"

namespace handpan::layouts {

namespace {

struct Frame {
  double lane_gap;
  double length;
  double near_y;  // judgment line, just past the far rim of the instrument
  double far_y;
};

double lane_x(const Frame& f, int dimple) { return (static_cast<double>(dimple) - 3.5) * f.lane_gap; }

NotePath make_path(const chart::Note& note, int lane, int plane, std::vector<Vec3> points) {
  NotePath path;
  path.note_id = note.id;
  path.dimple = note.dimple;
  path.onset_ms = note.onset_ms;
  path.lane = lane;
  path.plane = plane;
  path.points = std::move(points);
  path.cumulative_m.reserve(path.points.size());
  double s = 0.0;
  path.cumulative_m.push_back(0.0);
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    s += distance(path.points[i - 1], path.points[i]);
    path.cumulative_m.push_back(s);
  }
  return path;
}

std::vector<Vec3> straight(Vec3 from, Vec3 to) { return {from, to}; }

std::vector<Vec3> cubic_bezier(Vec3 p0, Vec3 p1, Vec3 p2, Vec3 p3, int samples) {
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(samples) + 1);
  for (int i = 0; i <= samples; ++i) {
    const double u = static_cast<double>(i) / samples;
    const double v = 1.0 - u;
    pts.push_back(v * v * v * p0 + 3.0 * v * v * u * p1 + 3.0 * v * u * u * p2 + u * u * u * p3);
  }
  pts.front() = p0;
  pts.back() = p3;
  return pts;
}

// Half circle whose diameter joins `from` and `to`, bulging upward.
std::vector<Vec3> semicircle(Vec3 from, Vec3 to, int samples) {
  const Vec3 mid = 0.5 * (from + to);
  const double r = 0.5 * distance(from, to);
  const Vec3 u = normalized(from - mid);
  const Vec3 up{0.0, 0.0, 1.0};
  Vec3 v = normalized(up - dot(up, u) * u);
  if (norm(v) == 0.0) {
    v = normalized(cross(u, Vec3{1.0, 0.0, 0.0}));
  }
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(samples) + 1);
  for (int i = 0; i <= samples; ++i) {
    const double theta = std::numbers::pi * static_cast<double>(i) / samples;
    pts.push_back(mid + r * (std::cos(theta) * u + std::sin(theta) * v));
  }
  pts.front() = from;
  pts.back() = to;
  return pts;
}

NotePath lane_path(const Frame& f, const chart::Note& note) {
  const double x = lane_x(f, note.dimple);
  return make_path(note, note.dimple, 0, straight({x, f.far_y, 0.0}, {x, f.near_y, 0.0}));
}

NotePath tunnel_path(const Frame& f, double size, const chart::Note& note) {
  const int plane = note.dimple / 2;
  const double offset = (note.dimple % 2 == 0 ? -0.25 : 0.25) * size;
  const double half = 0.5 * size;
  // Square cross-section around the y axis, bottom plane level with the instrument top.
  auto at = [&](double y) -> Vec3 {
    switch (plane) {
      case 0: return {offset, y, 0.0};
      case 1: return {half, y, half + offset};
      case 2: return {-offset, y, size};
      default: return {-half, y, half - offset};
    }
  };
  return make_path(note, note.dimple, plane, straight(at(f.far_y), at(f.near_y)));
}

NotePath direct_curved_path(const Frame& f, const HandpanModel& model, int samples, const chart::Note& note) {
  const Vec3 target = model.dimples[static_cast<std::size_t>(note.dimple)].center;
  const Vec3 start{lane_x(f, note.dimple), f.far_y, 0.5 * f.length};
  const Vec3 c1 = start + Vec3{0.0, -0.5 * f.length, 0.0};
  const Vec3 c2 = target + Vec3{0.0, 0.0, 0.4 * f.length};
  return make_path(note, note.dimple, -1, cubic_bezier(start, c1, c2, target, samples));
}

NotePath semicircular_path(const Frame& f, int samples, const chart::Note& note) {
  const int column = note.dimple < 4 ? 0 : 1;
  const int slot = note.dimple % 4;
  const double column_x = (column == 0 ? -2.5 : 2.5) * f.lane_gap;
  const Vec3 origin{lane_x(f, note.dimple), f.far_y, 0.0};
  const Vec3 end{column_x, f.near_y, (0.5 + static_cast<double>(slot)) * f.lane_gap};
  return make_path(note, note.dimple, column, semicircle(origin, end, samples));
}

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

}  // namespace

std::string_view kind_name(InterfaceKind kind) {
  switch (kind) {
    case InterfaceKind::StandardPath: return "StandardPath";
    case InterfaceKind::HighlightedDimple: return "HighlightedDimple";
    case InterfaceKind::FourSplitPath: return "FourSplitPath";
    case InterfaceKind::DirectCurvedPath: return "DirectCurvedPath";
    case InterfaceKind::SemicircularTwoSplitPath: return "SemicircularTwoSplitPath";
    case InterfaceKind::Video: return "Video";
  }
  return "Unknown";
}

InterfaceKind parse_kind(std::string_view name) {
  for (auto kind : kAllInterfaces) {
    if (kind_name(kind) == name) {
      return kind;
    }
  }
  throw InvalidParams("unknown interface '" + std::string(name) + "'");
}

LayoutGeometry build_layout(InterfaceKind kind, const HandpanModel& model, const chart::Chart& chart,
                            const LayoutParams& params) {
  if (!(params.scroll_speed_mps > 0.0) || !(params.highway_length_m > 0.0)) {
    throw InvalidParams("scroll speed and highway length must be positive");
  }
  if (!(params.lane_gap_m > 0.0) || !(params.tunnel_size_m > 0.0) || params.curve_samples < 1) {
    throw InvalidParams("lane gap, tunnel size and curve samples must be positive");
  }
  if (auto violations = chart::validate_chart(chart); !violations.empty()) {
    throw InvalidParams("invalid chart: " + violations.front().describe());
  }

  LayoutGeometry layout;
  layout.kind = kind;
  layout.scroll_speed_mps = params.scroll_speed_mps;
  layout.highway_length_m = params.highway_length_m;
  layout.travel_time_ms = 1000.0 * params.highway_length_m / params.scroll_speed_mps;
  layout.show_plane = kind != InterfaceKind::HighlightedDimple || params.show_plane;
  layout.model = model;

  if (kind == InterfaceKind::Video) {
    layout.media_ref = replace_all(params.media_ref, "{song}", chart::chart_id(chart));
    if (layout.media_ref->empty()) {
      layout.media_ref = "media/handpan_lesson.mp4";
    }
    return layout;
  }

  const double near_y = model.body_radius_m + 0.05;
  const Frame frame{params.lane_gap_m, params.highway_length_m, near_y, near_y + params.highway_length_m};

  for (const auto& note : chart.notes()) {
    switch (kind) {
      case InterfaceKind::StandardPath:
      case InterfaceKind::HighlightedDimple:
        layout.note_paths.push_back(lane_path(frame, note));
        break;
      case InterfaceKind::FourSplitPath:
        layout.note_paths.push_back(tunnel_path(frame, params.tunnel_size_m, note));
        break;
      case InterfaceKind::DirectCurvedPath:
        layout.note_paths.push_back(direct_curved_path(frame, model, params.curve_samples, note));
        break;
      case InterfaceKind::SemicircularTwoSplitPath:
        layout.note_paths.push_back(semicircular_path(frame, params.curve_samples, note));
        break;
      case InterfaceKind::Video:
        break;
    }
    if (kind == InterfaceKind::HighlightedDimple) {
      const double onset = static_cast<double>(note.onset_ms);
      layout.rings.push_back(RingSchedule{note.id, onset - layout.travel_time_ms, onset,
                                          model.dimples[static_cast<std::size_t>(note.dimple)].radius_m});
    }
  }
  return layout;
}

std::optional<Vec3> note_position(const LayoutGeometry& layout, const chart::Note& note, double t_ms) {
  if (layout.kind == InterfaceKind::Video) {
    throw VideoHasNoPaths();
  }
  if (note.id < 0 || static_cast<std::size_t>(note.id) >= layout.note_paths.size()) {
    throw InvalidParams("note id " + std::to_string(note.id) + " not in layout");
  }
  const NotePath& path = layout.note_paths[static_cast<std::size_t>(note.id)];
  const double onset = static_cast<double>(path.onset_ms);
  const double start = onset - layout.travel_time_ms;
  if (t_ms < start || t_ms > onset) {
    return std::nullopt;
  }
  if (t_ms == onset) {
    return path.endpoint();
  }
  if (t_ms == start) {
    return path.start();
  }

  const double s = (t_ms - start) / layout.travel_time_ms * path.length_m();
  const auto it = std::upper_bound(path.cumulative_m.begin(), path.cumulative_m.end(), s);
  if (it == path.cumulative_m.end()) {
    return path.endpoint();
  }
  const auto hi = static_cast<std::size_t>(it - path.cumulative_m.begin());
  const std::size_t lo = hi - 1;
  const double seg = path.cumulative_m[hi] - path.cumulative_m[lo];
  const double frac = seg > 0.0 ? (s - path.cumulative_m[lo]) / seg : 0.0;
  return path.points[lo] + frac * (path.points[hi] - path.points[lo]);
}

RingState highlight_state(const HandpanModel& model, const chart::Note& note, double t_ms, double travel_time_ms) {
  RingState ring;
  ring.note_id = note.id;
  ring.outer_radius_m = model.dimples.at(static_cast<std::size_t>(note.dimple)).radius_m;
  const double onset = static_cast<double>(note.onset_ms);
  const double start = onset - travel_time_ms;
  ring.active = t_ms >= start && t_ms <= onset;
  if (t_ms >= onset) {
    ring.inner_radius_m = ring.outer_radius_m;
  } else if (travel_time_ms > 0.0) {
    const double frac = std::clamp((t_ms - start) / travel_time_ms, 0.0, 1.0);
    ring.inner_radius_m = ring.outer_radius_m * frac;
  }
  return ring;
}

}  // namespace handpan::layouts
