// Text form of a LayoutGeometry:
//
//   KIND <kind>
//   TRAVEL <travel_ms> SPEED <mps> LENGTH <m>
//   PLANE <0|1>
//   DIMPLE <i> <x> <y> <z> <radius_m> <#RRGGBB> <pitch>     (8 lines)
//   NOTE <id> <dimple> <onset_ms>                            (one per note)
//   PATH <note_id> <n> x y z ...                             (guided kinds)
//   RING <note_id> <t0> <t1> <R>                             (HighlightedDimple)
//   MEDIA <ref>                                              (Video)
//
// Reals use the shortest representation that parses back to the same double.

#include <charconv>
#include <sstream>

#include "handpan/layouts.hpp"

namespace handpan::layouts {

namespace {

std::string real(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<std::string_view> tokens_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const std::size_t next = line.find(' ', pos);
    const std::size_t end = next == std::string_view::npos ? line.size() : next;
    if (end > pos) {
      out.push_back(line.substr(pos, end - pos));
    }
    pos = end + 1;
  }
  return out;
}

[[noreturn]] void malformed(std::string_view line) {
  throw InvalidParams("malformed layout line: '" + std::string(line.substr(0, 80)) + "'");
}

template <typename T>
T number(std::string_view token, std::string_view line) {
  T value{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), value);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    malformed(line);
  }
  return value;
}

}  // namespace

std::string serialize_layout(const LayoutGeometry& layout) {
  std::ostringstream os;
  os << "KIND " << kind_name(layout.kind) << '\n';
  os << "TRAVEL " << real(layout.travel_time_ms) << " SPEED " << real(layout.scroll_speed_mps) << " LENGTH "
     << real(layout.highway_length_m) << '\n';
  os << "PLANE " << (layout.show_plane ? 1 : 0) << '\n';
  for (const auto& d : layout.model.dimples) {
    os << "DIMPLE " << d.index << ' ' << real(d.center.x) << ' ' << real(d.center.y) << ' ' << real(d.center.z) << ' '
       << real(d.radius_m) << ' ' << to_hex(d.color) << ' ' << d.pitch_name << '\n';
  }
  for (const auto& p : layout.note_paths) {
    os << "NOTE " << p.note_id << ' ' << p.dimple << ' ' << p.onset_ms << '\n';
  }
  for (const auto& p : layout.note_paths) {
    os << "PATH " << p.note_id << ' ' << p.points.size();
    for (const auto& v : p.points) {
      os << ' ' << real(v.x) << ' ' << real(v.y) << ' ' << real(v.z);
    }
    os << '\n';
  }
  for (const auto& r : layout.rings) {
    os << "RING " << r.note_id << ' ' << real(r.t0_ms) << ' ' << real(r.t1_ms) << ' ' << real(r.radius_m) << '\n';
  }
  if (layout.media_ref) {
    os << "MEDIA " << *layout.media_ref << '\n';
  }
  return os.str();
}

LayoutGeometry parse_layout(std::string_view blob) {
  LayoutGeometry layout;
  layout.note_paths.clear();
  bool have_kind = false;
  std::size_t dimples_seen = 0;
  // NOTE lines precede PATH lines; remember (dimple, onset) per id until the path arrives.
  std::vector<std::pair<int, std::int64_t>> note_info;

  std::size_t pos = 0;
  while (pos < blob.size()) {
    std::size_t end = blob.find('\n', pos);
    if (end == std::string_view::npos) {
      end = blob.size();
    }
    const std::string_view line = blob.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) {
      continue;
    }
    const auto tok = tokens_of(line);
    const std::string_view tag = tok.front();

    if (tag == "KIND" && tok.size() == 2) {
      layout.kind = parse_kind(tok[1]);
      have_kind = true;
    } else if (tag == "TRAVEL" && tok.size() == 6 && tok[2] == "SPEED" && tok[4] == "LENGTH") {
      layout.travel_time_ms = number<double>(tok[1], line);
      layout.scroll_speed_mps = number<double>(tok[3], line);
      layout.highway_length_m = number<double>(tok[5], line);
    } else if (tag == "PLANE" && tok.size() == 2) {
      layout.show_plane = number<int>(tok[1], line) != 0;
    } else if (tag == "DIMPLE" && tok.size() == 8) {
      const int i = number<int>(tok[1], line);
      if (i < 0 || i >= chart::kDimpleCount) {
        malformed(line);
      }
      auto& d = layout.model.dimples[static_cast<std::size_t>(i)];
      d.index = i;
      d.center = {number<double>(tok[2], line), number<double>(tok[3], line), number<double>(tok[4], line)};
      d.radius_m = number<double>(tok[5], line);
      d.color = parse_hex(tok[6]);
      d.pitch_name = std::string(tok[7]);
      ++dimples_seen;
    } else if (tag == "NOTE" && tok.size() == 4) {
      const int id = number<int>(tok[1], line);
      if (id != static_cast<int>(note_info.size())) {
        malformed(line);
      }
      note_info.emplace_back(number<int>(tok[2], line), number<std::int64_t>(tok[3], line));
    } else if (tag == "PATH" && tok.size() >= 3) {
      const int id = number<int>(tok[1], line);
      const auto n = number<std::size_t>(tok[2], line);
      if (id != static_cast<int>(layout.note_paths.size()) || id >= static_cast<int>(note_info.size()) || n < 2 ||
          tok.size() != 3 + 3 * n) {
        malformed(line);
      }
      std::vector<Vec3> points;
      for (std::size_t k = 0; k < n; ++k) {
        points.push_back({number<double>(tok[3 + 3 * k], line), number<double>(tok[4 + 3 * k], line),
                          number<double>(tok[5 + 3 * k], line)});
      }
      NotePath path;
      path.note_id = id;
      path.dimple = note_info[static_cast<std::size_t>(id)].first;
      path.onset_ms = note_info[static_cast<std::size_t>(id)].second;
      path.lane = path.dimple;
      path.points = std::move(points);
      path.cumulative_m.push_back(0.0);
      for (std::size_t k = 1; k < path.points.size(); ++k) {
        path.cumulative_m.push_back(path.cumulative_m.back() + distance(path.points[k - 1], path.points[k]));
      }
      layout.note_paths.push_back(std::move(path));
    } else if (tag == "RING" && tok.size() == 5) {
      layout.rings.push_back(RingSchedule{number<int>(tok[1], line), number<double>(tok[2], line),
                                          number<double>(tok[3], line), number<double>(tok[4], line)});
    } else if (tag == "MEDIA" && line.size() > 6) {
      layout.media_ref = std::string(line.substr(6));
    } else {
      malformed(line);
    }
  }
  if (!have_kind || dimples_seen != chart::kDimpleCount) {
    throw InvalidParams("layout blob missing KIND or DIMPLE lines");
  }
  // Plane membership is implied by the kind.
  for (auto& p : layout.note_paths) {
    switch (layout.kind) {
      case InterfaceKind::FourSplitPath: p.plane = p.dimple / 2; break;
      case InterfaceKind::DirectCurvedPath: p.plane = -1; break;
      case InterfaceKind::SemicircularTwoSplitPath: p.plane = p.dimple < 4 ? 0 : 1; break;
      default: p.plane = 0; break;
    }
  }
  return layout;
}

}  // namespace handpan::layouts
