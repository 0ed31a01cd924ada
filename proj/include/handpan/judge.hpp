#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "handpan/chart.hpp"

namespace handpan::judge {

inline constexpr std::int64_t kDefaultWindowMs = 150;

enum class StrikeSource { UI, Simulated };

struct Strike {
  int dimple = 0;
  std::int64_t t_ms = 0;
  StrikeSource source = StrikeSource::Simulated;

  friend bool operator==(const Strike&, const Strike&) = default;
};

struct Pair {
  int note_id = 0;
  std::size_t strike_index = 0;
  std::int64_t delta_ms = 0;  // strike time minus onset

  friend bool operator==(const Pair&, const Pair&) = default;
};

struct JudgmentReport {
  std::vector<Pair> pairs;              // sorted by note id
  std::vector<int> misses;              // ascending note ids
  std::vector<std::size_t> extraneous;  // ascending strike indices
  int score = 0;
  int max_score = 0;
  std::int64_t window_ms = kDefaultWindowMs;
};

using IndexPair = std::pair<std::size_t, std::size_t>;  // (note index, strike index)

/// Maximum matching between one dimple's notes and strikes, both ascending in time.
/// Strikes are scanned in order; each takes the earliest unmatched note with
/// |strike - onset| <= window. Each strike's admissible notes form a contiguous
/// run whose ends never move backwards, so the scan is optimal.
std::vector<IndexPair> match_dimple(std::span<const std::int64_t> note_onsets,
                                    std::span<const std::int64_t> strike_times, std::int64_t window_ms);

/// Scores a strike log against a chart. Score is the maximum number of
/// (note, strike) pairs sharing a dimple with |delta| <= window_ms. Strikes on
/// dimples outside 0..7 are reported as extraneous. Throws InvalidParams when
/// window_ms <= 0.
JudgmentReport judge_session(const chart::Chart& chart, std::span<const Strike> strikes, std::int64_t window_ms);

struct ScoreSummary {
  int hits = 0;
  int misses = 0;
  int extraneous = 0;
  double mean_abs_delta_ms = 0.0;
  double sd_delta_ms = 0.0;  // sample sd (n - 1); 0 for fewer than two pairs
};

ScoreSummary score_summary(const JudgmentReport& report);

}  // namespace handpan::judge
