#include "handpan/judge.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

namespace handpan::judge {

std::vector<IndexPair> match_dimple(std::span<const std::int64_t> note_onsets,
                                    std::span<const std::int64_t> strike_times, std::int64_t window_ms) {
  std::vector<IndexPair> matched;
  // Notes before `first_open` are either matched or too early for every later strike.
  std::size_t first_open = 0;
  std::vector<bool> used(note_onsets.size(), false);
  for (std::size_t s = 0; s < strike_times.size(); ++s) {
    const std::int64_t t = strike_times[s];
    while (first_open < note_onsets.size() && (used[first_open] || note_onsets[first_open] < t - window_ms)) {
      ++first_open;
    }
    for (std::size_t n = first_open; n < note_onsets.size() && note_onsets[n] <= t + window_ms; ++n) {
      if (!used[n]) {
        used[n] = true;
        matched.emplace_back(n, s);
        break;
      }
    }
  }
  return matched;
}

JudgmentReport judge_session(const chart::Chart& chart, std::span<const Strike> strikes, std::int64_t window_ms) {
  if (window_ms <= 0) {
    throw InvalidParams("window_ms must be positive");
  }
  const auto notes = chart.notes();

  JudgmentReport report;
  report.window_ms = window_ms;
  report.max_score = static_cast<int>(notes.size());

  std::vector<bool> strike_used(strikes.size(), false);
  std::vector<bool> note_used(notes.size(), false);

  for (int dimple = 0; dimple < chart::kDimpleCount; ++dimple) {
    std::vector<std::size_t> note_idx;
    for (std::size_t i = 0; i < notes.size(); ++i) {
      if (notes[i].dimple == dimple) {
        note_idx.push_back(i);
      }
    }
    // Charts are onset-ordered already; the stable sort keeps ties toward the earlier id.
    std::stable_sort(note_idx.begin(), note_idx.end(),
                     [&](std::size_t a, std::size_t b) { return notes[a].onset_ms < notes[b].onset_ms; });

    std::vector<std::size_t> strike_idx;
    for (std::size_t i = 0; i < strikes.size(); ++i) {
      if (strikes[i].dimple == dimple) {
        strike_idx.push_back(i);
      }
    }
    std::stable_sort(strike_idx.begin(), strike_idx.end(),
                     [&](std::size_t a, std::size_t b) { return strikes[a].t_ms < strikes[b].t_ms; });

    std::vector<std::int64_t> onsets;
    onsets.reserve(note_idx.size());
    for (auto i : note_idx) {
      onsets.push_back(notes[i].onset_ms);
    }
    std::vector<std::int64_t> times;
    times.reserve(strike_idx.size());
    for (auto i : strike_idx) {
      times.push_back(strikes[i].t_ms);
    }

    for (const auto& [n, s] : match_dimple(onsets, times, window_ms)) {
      const auto& note = notes[note_idx[n]];
      const std::size_t strike = strike_idx[s];
      report.pairs.push_back(Pair{note.id, strike, strikes[strike].t_ms - note.onset_ms});
      note_used[note_idx[n]] = true;
      strike_used[strike] = true;
    }
  }

  std::sort(report.pairs.begin(), report.pairs.end(),
            [](const Pair& a, const Pair& b) { return a.note_id < b.note_id; });
  for (std::size_t i = 0; i < notes.size(); ++i) {
    if (!note_used[i]) {
      report.misses.push_back(notes[i].id);
    }
  }
  std::sort(report.misses.begin(), report.misses.end());
  for (std::size_t i = 0; i < strikes.size(); ++i) {
    if (!strike_used[i]) {
      report.extraneous.push_back(i);
    }
  }
  report.score = static_cast<int>(report.pairs.size());
  return report;
}

ScoreSummary score_summary(const JudgmentReport& report) {
  ScoreSummary summary;
  summary.hits = report.score;
  summary.misses = static_cast<int>(report.misses.size());
  summary.extraneous = static_cast<int>(report.extraneous.size());
  const std::size_t n = report.pairs.size();
  if (n == 0) {
    return summary;
  }
  double abs_sum = 0.0;
  double sum = 0.0;
  for (const auto& p : report.pairs) {
    abs_sum += std::abs(static_cast<double>(p.delta_ms));
    sum += static_cast<double>(p.delta_ms);
  }
  summary.mean_abs_delta_ms = abs_sum / static_cast<double>(n);
  if (n >= 2) {
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const auto& p : report.pairs) {
      const double d = static_cast<double>(p.delta_ms) - mean;
      ss += d * d;
    }
    summary.sd_delta_ms = std::sqrt(ss / static_cast<double>(n - 1));
  }
  return summary;
}

}  // namespace handpan::judge
