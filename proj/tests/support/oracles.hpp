#pragma once

// Independent reference implementations used by the tests. Nothing here
// calls into the library code it checks.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "handpan/chart.hpp"
#include "handpan/judge.hpp"

namespace oracle {

// Exhaustive maximum matching: DP over (strike position, set of used notes),
// trying every admissible note for every strike. Exponential in the note
// count, so only for small instances (<= 16 notes).
inline int max_matching(const std::vector<std::int64_t>& onsets, const std::vector<std::int64_t>& times,
                        std::int64_t window) {
  const std::size_t n = onsets.size();
  std::map<std::pair<std::size_t, std::uint32_t>, int> memo;
  auto solve = [&](auto&& self, std::size_t i, std::uint32_t used) -> int {
    if (i == times.size()) return 0;
    const auto key = std::make_pair(i, used);
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    int best = self(self, i + 1, used);
    for (std::size_t j = 0; j < n; ++j) {
      const std::int64_t d = times[i] - onsets[j];
      if (!(used & (1u << j)) && d <= window && -d <= window) {
        best = std::max(best, 1 + self(self, i + 1, used | (1u << j)));
      }
    }
    memo[key] = best;
    return best;
  };
  return solve(solve, 0, 0);
}

// Whole-session score from the per-dimple oracle.
inline int max_score(const handpan::chart::Chart& chart, const std::vector<handpan::judge::Strike>& strikes,
                     std::int64_t window) {
  int total = 0;
  for (int d = 0; d < handpan::chart::kDimpleCount; ++d) {
    std::vector<std::int64_t> onsets;
    std::vector<std::int64_t> times;
    for (const auto& p : chart.patterns) {
      for (const auto& n : p.notes) {
        if (n.dimple == d) onsets.push_back(n.onset_ms);
      }
    }
    for (const auto& s : strikes) {
      if (s.dimple == d) times.push_back(s.t_ms);
    }
    total += max_matching(onsets, times, window);
  }
  return total;
}

// Random valid chart: patterns of non-decreasing onsets, chords on distinct dimples.
inline handpan::chart::Chart random_chart(std::mt19937_64& rng, int max_patterns, int max_notes_per_pattern,
                                          std::int64_t max_gap_ms) {
  using namespace handpan::chart;
  std::uniform_int_distribution<int> patterns(1, max_patterns);
  std::uniform_int_distribution<int> notes(1, max_notes_per_pattern);
  std::uniform_int_distribution<int> dimple(0, kDimpleCount - 1);
  std::uniform_int_distribution<std::int64_t> gap(0, max_gap_ms);
  Chart c;
  c.title = "random " + std::to_string(rng() % 1000);
  c.scale_name = "D-Integral";
  std::int64_t t = gap(rng);
  int id = 0;
  const int pc = patterns(rng);
  for (int p = 1; p <= pc; ++p) {
    Pattern pat;
    pat.index = p;
    std::set<int> chord;
    const int nc = notes(rng);
    for (int k = 0; k < nc; ++k) {
      const std::int64_t g = gap(rng);
      if (g != 0) chord.clear();
      t += g;
      int d = dimple(rng);
      while (chord.contains(d)) {
        if (chord.size() == static_cast<std::size_t>(kDimpleCount)) {
          t += 1;
          chord.clear();
        }
        d = dimple(rng);
      }
      chord.insert(d);
      pat.notes.push_back(Note{d, t, id++});
    }
    c.patterns.push_back(std::move(pat));
  }
  return c;
}

// Random strikes around (and away from) a chart's notes.
inline std::vector<handpan::judge::Strike> random_strikes(const handpan::chart::Chart& chart, std::mt19937_64& rng,
                                                          int max_per_dimple, std::int64_t spread_ms) {
  std::vector<handpan::judge::Strike> out;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  for (const auto& n : chart.notes()) hi = std::max(hi, n.onset_ms);
  std::uniform_int_distribution<int> count(0, max_per_dimple);
  std::uniform_int_distribution<std::int64_t> t(lo - spread_ms, hi + spread_ms);
  for (int d = 0; d < handpan::chart::kDimpleCount; ++d) {
    const int c = count(rng);
    for (int i = 0; i < c; ++i) out.push_back({d, t(rng), handpan::judge::StrikeSource::Simulated});
  }
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

// Each value once per row and once per column.
inline bool is_latin(const std::vector<std::vector<int>>& rows, int k) {
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != k) return false;
    std::set<int> seen(row.begin(), row.end());
    if (static_cast<int>(seen.size()) != k || *seen.begin() != 0 || *seen.rbegin() != k - 1) return false;
  }
  for (int c = 0; c < k; ++c) {
    std::set<int> seen;
    for (const auto& row : rows) seen.insert(row[static_cast<std::size_t>(c)]);
    if (static_cast<int>(seen.size()) != k) return false;
  }
  return true;
}

// Count of each ordered adjacent pair (a, b) across all rows.
inline std::map<std::pair<int, int>, int> adjacency_counts(const std::vector<std::vector<int>>& rows) {
  std::map<std::pair<int, int>, int> counts;
  for (const auto& row : rows) {
    for (std::size_t i = 0; i + 1 < row.size(); ++i) ++counts[{row[i], row[i + 1]}];
  }
  return counts;
}

// Sum-of-squares decomposition straight from the definitions.
struct SumsOfSquares {
  double cond = 0.0;
  double subj = 0.0;
  double err = 0.0;
  double total = 0.0;
};

inline SumsOfSquares sums_of_squares(const std::vector<std::vector<double>>& x) {
  const std::size_t n = x.size();
  const std::size_t k = x.front().size();
  double grand = 0.0;
  for (const auto& row : x)
    for (double v : row) grand += v;
  grand /= static_cast<double>(n * k);
  SumsOfSquares s;
  for (std::size_t j = 0; j < k; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += x[i][j];
    m /= static_cast<double>(n);
    s.cond += static_cast<double>(n) * (m - grand) * (m - grand);
  }
  for (std::size_t i = 0; i < n; ++i) {
    double m = 0.0;
    for (double v : x[i]) m += v;
    m /= static_cast<double>(k);
    s.subj += static_cast<double>(k) * (m - grand) * (m - grand);
  }
  for (const auto& row : x)
    for (double v : row) s.total += (v - grand) * (v - grand);
  s.err = s.total - s.cond - s.subj;
  return s;
}

}  // namespace oracle
