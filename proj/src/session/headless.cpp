#include <cmath>
#include <ctime>
#include <map>
#include <sstream>

#include "handpan/session.hpp"

namespace handpan::session {

namespace {

// Rest between simulated trials, on top of the chart's own length.
constexpr std::int64_t kTrialPauseMs = 5000;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double parse_number(std::string_view key, std::string_view value) {
  std::string s(value);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw InvalidParams("profile field '" + std::string(key) + "' is not a number: '" + s + "'");
  }
  return v;
}

}  // namespace

void validate_profile(const PlayerProfile& profile) {
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(profile.hit_prob) || !prob(profile.wrong_dimple_prob)) {
    throw InvalidParams("profile probabilities must lie in [0, 1]");
  }
  if (!(profile.jitter_sd_ms >= 0.0) || !std::isfinite(profile.jitter_sd_ms) || !std::isfinite(profile.bias_ms)) {
    throw InvalidParams("profile jitter must be a finite value >= 0");
  }
}

PlayerProfile parse_player_profile(std::string_view text) {
  if (text == "perfect") return {1.0, 0.0, 0.0, 0.0};
  if (text == "steady") return {1.0, 60.0, 0.0, 0.0};
  if (text == "novice") return {0.7, 120.0, 40.0, 0.15};
  if (text == "absent") return {0.0, 0.0, 0.0, 0.0};

  PlayerProfile profile;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view item = text.substr(pos, end - pos);
    pos = end + 1;
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidParams("unknown player profile '" + std::string(text) + "'");
    }
    const std::string_view key = item.substr(0, eq);
    const double v = parse_number(key, item.substr(eq + 1));
    if (key == "p") {
      profile.hit_prob = v;
    } else if (key == "sigma") {
      profile.jitter_sd_ms = v;
    } else if (key == "bias") {
      profile.bias_ms = v;
    } else if (key == "wrong") {
      profile.wrong_dimple_prob = v;
    } else {
      throw InvalidParams("unknown profile field '" + std::string(key) + "' (p, sigma, bias, wrong)");
    }
    if (end == text.size()) break;
  }
  validate_profile(profile);
  return profile;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t participant, std::uint64_t trial) {
  return splitmix64(splitmix64(splitmix64(seed) ^ participant) ^ (trial + 0x51ED27ULL));
}

std::vector<judge::Strike> generate_strikes(const chart::Chart& chart, const PlayerProfile& profile,
                                            std::mt19937_64& rng) {
  validate_profile(profile);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_int_distribution<int> other(1, chart::kDimpleCount - 1);

  std::vector<judge::Strike> strikes;
  for (const auto& note : chart.notes()) {
    // Draw every variate for every note so one field never shifts the stream of another.
    const double u_hit = unit(rng);
    const double z = jitter(rng);
    const double u_wrong = unit(rng);
    const int shift = other(rng);
    if (u_hit >= profile.hit_prob) {
      continue;
    }
    const double t = static_cast<double>(note.onset_ms) + profile.bias_ms + profile.jitter_sd_ms * z;
    int dimple = note.dimple;
    if (u_wrong < profile.wrong_dimple_prob) {
      dimple = (note.dimple + shift) % chart::kDimpleCount;
    }
    strikes.push_back(judge::Strike{dimple, std::llround(t), judge::StrikeSource::Simulated});
  }
  return strikes;
}

std::string iso8601_utc(Timestamp t) {
  const auto secs = std::chrono::floor<std::chrono::seconds>(t);
  const std::time_t tt = static_cast<std::time_t>(secs.time_since_epoch().count());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<TrialResult> run_headless(const SessionPlan& plan, std::span<const chart::Chart> charts,
                                      const PlayerProfile& profile, std::int64_t window_ms, std::uint64_t seed,
                                      const HeadlessOptions& options) {
  validate_profile(profile);
  if (window_ms <= 0) {
    throw InvalidParams("window_ms must be positive");
  }
  std::map<std::string, const chart::Chart*> by_id;
  for (const auto& c : charts) {
    by_id.emplace(chart::chart_id(c), &c);
  }
  for (const auto& cond : plan.conditions) {
    if (!by_id.contains(cond.song_id)) {
      throw InvalidParams("no chart for song '" + cond.song_id + "'");
    }
  }
  if (plan.order.size() != plan.participants.size()) {
    throw InvalidParams("plan order rows do not match participants");
  }

  std::vector<TrialResult> results;
  for (std::size_t p = 0; p < plan.participants.size(); ++p) {
    // Participants are simulated one hour apart.
    auto clock = options.origin + std::chrono::hours(static_cast<long>(p));
    for (std::size_t trial = 0; trial < plan.order[p].size(); ++trial) {
      const auto cond_index = static_cast<std::size_t>(plan.order[p][trial]);
      const Condition& cond = plan.conditions.at(cond_index);
      const chart::Chart& chart = *by_id.at(cond.song_id);

      std::mt19937_64 rng(trial_seed(seed, p, trial));
      const auto strikes = generate_strikes(chart, profile, rng);
      const auto report = judge::judge_session(chart, strikes, window_ms);

      TrialResult r;
      r.participant = plan.participants[p];
      r.order_index = static_cast<int>(trial);
      r.interface = cond.interface;
      r.song_id = cond.song_id;
      r.score = report.score;
      r.max_score = report.max_score;
      r.window_ms = window_ms;
      r.timestamp = iso8601_utc(clock);
      results.push_back(std::move(r));

      const auto notes = chart.notes();
      const std::int64_t length = notes.empty() ? 0 : notes.back().onset_ms + window_ms;
      clock += std::chrono::milliseconds(length + kTrialPauseMs);
    }
  }
  return results;
}

}  // namespace handpan::session
