#include "handpan/chart.hpp"

#include <array>
#include <string>

namespace handpan::chart {

namespace {

constexpr std::int64_t kFirstOnsetMs = 1000;
constexpr std::int64_t kInPatternGapMs = 500;
constexpr std::int64_t kBetweenPatternGapMs = 1500;
constexpr std::int64_t kWarmupGapMs = 1000;
constexpr std::string_view kScale = "D-Integral";

// Builds a chart from per-pattern dimple sequences with the fixed bundled timing.
Chart timed_chart(std::string title, const std::vector<std::vector<int>>& patterns, std::int64_t in_gap,
                  std::int64_t between_gap) {
  Chart chart{std::move(title), std::string(kScale), {}};
  std::int64_t t = kFirstOnsetMs;
  int id = 0;
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    Pattern pattern{static_cast<int>(p) + 1, {}};
    for (std::size_t i = 0; i < patterns[p].size(); ++i) {
      if (i > 0) {
        t += in_gap;
      }
      pattern.notes.push_back(Note{patterns[p][i], t, id++});
    }
    chart.patterns.push_back(std::move(pattern));
    t += between_gap;
  }
  return chart;
}

Chart make_song_a() {
  std::vector<std::vector<int>> patterns(10, std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
  return timed_chart("song_a", patterns, kInPatternGapMs, kBetweenPatternGapMs);
}

Chart make_song_b() {
  std::vector<std::vector<int>> patterns(4, std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 0, 1, 2, 3});
  patterns.push_back({0});
  return timed_chart("song_b", patterns, kInPatternGapMs, kBetweenPatternGapMs);
}

Chart make_scale_warmup() {
  return timed_chart("scale_warmup", {{0, 1, 2, 3, 4, 5, 6, 7}}, kWarmupGapMs, 0);
}

std::string_view header_comment(std::string_view id) {
  if (id == "song_a") {
    return "; song_a: 80 notes in 10 patterns of 8.\n"
           "; Synthesized stand-in melody: each pattern walks dimples 0..7.\n"
           "; Timing: first onset 1000 ms, 500 ms between notes, 1500 ms between patterns.\n";
  }
  if (id == "song_b") {
    return "; song_b: 49 notes in patterns of 12, 12, 12, 12 and 1.\n"
           "; Synthesized stand-in melody: each 12-note pattern walks dimples 0..7 then 0..3.\n"
           "; Timing: first onset 1000 ms, 500 ms between notes, 1500 ms between patterns.\n";
  }
  return "; scale_warmup: ascending D Integral scale, dimples 0..7, 1000 ms apart.\n";
}

}  // namespace

std::vector<Chart> builtin_charts() {
  return {make_song_a(), make_song_b(), make_scale_warmup()};
}

Chart builtin_chart(std::string_view id) {
  if (id == "song_a") {
    return make_song_a();
  }
  if (id == "song_b") {
    return make_song_b();
  }
  if (id == "scale_warmup") {
    return make_scale_warmup();
  }
  throw InvalidParams("unknown builtin chart '" + std::string(id) + "'");
}

std::string bundled_chart_document(std::string_view id) {
  const std::string canonical = serialize_chart(builtin_chart(id));
  // Comments may appear anywhere after the magic line.
  const std::size_t after_magic = canonical.find('\n') + 1;
  return canonical.substr(0, after_magic) + std::string(header_comment(id)) + canonical.substr(after_magic);
}

}  // namespace handpan::chart
