#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "handpan/chart.hpp"
#include "handpan/judge.hpp"
#include "oracles.hpp"

using namespace handpan;
using judge::Strike;

namespace {

chart::Chart chart_of(std::vector<chart::Note> notes) {
  chart::Chart c;
  c.title = "t";
  c.scale_name = "s";
  for (std::size_t i = 0; i < notes.size(); ++i) notes[i].id = static_cast<int>(i);
  c.patterns = {chart::Pattern{1, std::move(notes)}};
  return c;
}

Strike strike(int d, std::int64_t t) { return Strike{d, t, judge::StrikeSource::Simulated}; }

}  // namespace

TEST_CASE("empty strike log on song_a misses everything") {
  const auto c = chart::builtin_chart("song_a");
  const auto r = judge::judge_session(c, {}, 150);
  CHECK(r.score == 0);
  CHECK(r.max_score == 80);
  CHECK(r.misses.size() == 80);
  CHECK(r.extraneous.empty());
}

TEST_CASE("one strike between two notes, 140 ms after the first") {
  const auto c = chart_of({{0, 1000, 0}, {0, 1300, 0}});
  const std::vector<Strike> s = {strike(0, 1140)};
  const auto r = judge::judge_session(c, s, 150);
  REQUIRE(r.score == 1);
  CHECK(r.pairs[0] == judge::Pair{0, 0, 140});
  CHECK(r.misses == std::vector<int>{1});
  CHECK(oracle::max_score(c, s, 150) == 1);
}

TEST_CASE("equidistant strike takes the earlier note; the window is inclusive") {
  const auto c = chart_of({{0, 1000, 0}, {0, 1300, 0}});
  const std::vector<Strike> s = {strike(0, 1150)};
  const auto r = judge::judge_session(c, s, 150);
  REQUIRE(r.score == 1);
  CHECK(r.pairs[0].note_id == 0);
  CHECK(r.pairs[0].delta_ms == 150);
  CHECK(oracle::max_score(c, s, 150) == 1);
  CHECK(judge::judge_session(c, std::vector<Strike>{strike(0, 1151)}, 150).pairs[0].note_id == 1);
}

TEST_CASE("match_dimple examples") {
  using V = std::vector<std::int64_t>;
  using P = std::vector<judge::IndexPair>;
  CHECK(judge::match_dimple(V{0}, V{0}, 1) == P{{0, 0}});
  CHECK(judge::match_dimple(V{0, 100}, V{60}, 50) == P{{1, 0}});
  const auto m = judge::match_dimple(V{0, 100, 200}, V{90, 110}, 100);
  CHECK(m.size() == 2);
  CHECK(oracle::max_matching({0, 100, 200}, {90, 110}, 100) == 2);
  CHECK(judge::match_dimple(V{}, V{1, 2}, 10).empty());
}

TEST_CASE("greedy earliest-note choice beats a naive nearest-note choice") {
  // Nearest-note would pair 50 with 60 and strand 0; the scan pairs both.
  using V = std::vector<std::int64_t>;
  CHECK(judge::match_dimple(V{0, 60}, V{50, 100}, 50).size() == 2);
  CHECK(oracle::max_matching({0, 60}, {50, 100}, 50) == 2);
}

TEST_CASE("strikes on the wrong dimple or out of range are extraneous") {
  const auto c = chart_of({{0, 1000, 0}});
  const std::vector<Strike> s = {strike(1, 1000), strike(9, 1000), strike(-1, 1000)};
  const auto r = judge::judge_session(c, s, 150);
  CHECK(r.score == 0);
  CHECK(r.extraneous == std::vector<std::size_t>{0, 1, 2});
  CHECK_THROWS_AS(judge::judge_session(c, s, 0), InvalidParams);
}

TEST_CASE("score_summary examples") {
  judge::JudgmentReport empty;
  empty.max_score = 5;
  empty.misses = {0, 1, 2, 3, 4};
  auto s = judge::score_summary(empty);
  CHECK(s.hits == 0);
  CHECK(s.misses == 5);
  CHECK(s.extraneous == 0);
  CHECK(s.mean_abs_delta_ms == 0.0);
  CHECK(s.sd_delta_ms == 0.0);

  const auto c = chart_of({{0, 1000, 0}, {1, 2000, 0}});
  const auto r = judge::judge_session(c, std::vector<Strike>{strike(0, 1010), strike(1, 1990)}, 150);
  s = judge::score_summary(r);
  CHECK(s.mean_abs_delta_ms == doctest::Approx(10.0));
  CHECK(s.sd_delta_ms == doctest::Approx(std::sqrt(200.0)).epsilon(1e-12));
  CHECK(s.sd_delta_ms == doctest::Approx(14.1421).epsilon(1e-5));

  const auto a = chart::builtin_chart("song_a");
  std::vector<Strike> perfect;
  for (const auto& n : a.notes()) perfect.push_back(strike(n.dimple, n.onset_ms));
  s = judge::score_summary(judge::judge_session(a, perfect, 150));
  CHECK(s.hits == 80);
  CHECK(s.mean_abs_delta_ms == 0.0);
  CHECK(s.sd_delta_ms == 0.0);
}

TEST_CASE("property: score equals the exhaustive maximum matching") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::int64_t> window(1, 400);
  for (int i = 0; i < 300; ++i) {
    const auto c = oracle::random_chart(rng, 2, 6, 300);
    const auto s = oracle::random_strikes(c, rng, 8, 500);
    const std::int64_t w = window(rng);
    const auto r = judge::judge_session(c, s, w);
    REQUIRE(r.score == oracle::max_score(c, s, w));
    CHECK(r.score + static_cast<int>(r.misses.size()) == r.max_score);
    CHECK(r.score + r.extraneous.size() == s.size());
  }
}

TEST_CASE("property: each strike and each note is used at most once, pairs lie in the window") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 300; ++i) {
    const auto c = oracle::random_chart(rng, 3, 8, 250);
    const auto s = oracle::random_strikes(c, rng, 10, 400);
    const auto r = judge::judge_session(c, s, 120);
    const auto notes = c.notes();
    std::set<int> used_notes;
    std::set<std::size_t> used_strikes;
    for (const auto& p : r.pairs) {
      CHECK(used_notes.insert(p.note_id).second);
      CHECK(used_strikes.insert(p.strike_index).second);
      const auto& n = notes[static_cast<std::size_t>(p.note_id)];
      CHECK(s[p.strike_index].dimple == n.dimple);
      CHECK(p.delta_ms == s[p.strike_index].t_ms - n.onset_ms);
      CHECK(std::abs(p.delta_ms) <= 120);
    }
    CHECK(std::is_sorted(r.pairs.begin(), r.pairs.end(),
                         [](const judge::Pair& a, const judge::Pair& b) { return a.note_id < b.note_id; }));
  }
}

TEST_CASE("property: order invariance, window monotonicity, extra strikes never hurt") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> window(1, 300);
  for (int i = 0; i < 300; ++i) {
    const auto c = oracle::random_chart(rng, 3, 8, 300);
    auto s = oracle::random_strikes(c, rng, 10, 400);
    const std::int64_t w = window(rng);
    const int base = judge::judge_session(c, s, w).score;

    auto shuffled = s;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(judge::judge_session(c, shuffled, w).score == base);

    CHECK(judge::judge_session(c, s, w + window(rng)).score >= base);

    s.push_back(strike(static_cast<int>(rng() % 8), static_cast<std::int64_t>(rng() % 20000)));
    CHECK(judge::judge_session(c, s, w).score >= base);
  }
}
