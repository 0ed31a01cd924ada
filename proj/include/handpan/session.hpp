#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "handpan/chart.hpp"
#include "handpan/error.hpp"
#include "handpan/judge.hpp"
#include "handpan/layouts.hpp"

namespace handpan::session {

// ---------------------------------------------------------------------------
// Counterbalancing
// ---------------------------------------------------------------------------

using OrderMatrix = std::vector<std::vector<int>>;

class OddOrderUnsupported : public Error {
 public:
  explicit OddOrderUnsupported(int k)
      : Error("balanced Latin square of odd order " + std::to_string(k) +
              " needs mirrored rows; use balanced_latin_square_odd") {}
};

/// Williams design for even k: k x k, each condition once per row and column,
/// each ordered adjacent pair exactly once across rows.
OrderMatrix balanced_latin_square(int k);

/// For odd k: the k Williams rows followed by their reversals (2k rows).
OrderMatrix balanced_latin_square_odd(int k);

struct Condition {
  layouts::InterfaceKind interface = layouts::InterfaceKind::StandardPath;
  std::string song_id;

  friend bool operator==(const Condition&, const Condition&) = default;
};

struct SessionPlan {
  std::vector<std::string> participants;
  std::vector<Condition> conditions;  // interface-major: interface i, song s -> i * songs + s
  OrderMatrix order;                  // per participant, a permutation of condition indices
};

/// Interface order per participant from the balanced square (rows assigned
/// cyclically); every interface block plays all songs, in listed order for
/// even participant positions and reversed for odd ones.
SessionPlan plan_session(std::span<const std::string> participant_ids,
                         std::span<const layouts::InterfaceKind> interfaces, std::span<const std::string> songs);

/// `participant: i0 i1 ...` lines.
std::string serialize_plan(const SessionPlan& plan);

// ---------------------------------------------------------------------------
// Trials
// ---------------------------------------------------------------------------

struct TrialResult {
  std::string participant;
  int order_index = 0;
  layouts::InterfaceKind interface = layouts::InterfaceKind::StandardPath;
  std::string song_id;
  int score = 0;
  int max_score = 0;
  std::int64_t window_ms = judge::kDefaultWindowMs;
  std::string timestamp;  // ISO-8601 UTC

  friend bool operator==(const TrialResult&, const TrialResult&) = default;
};

/// Simulated participant.
struct PlayerProfile {
  double hit_prob = 1.0;
  double jitter_sd_ms = 0.0;
  double bias_ms = 0.0;
  double wrong_dimple_prob = 0.0;
};

void validate_profile(const PlayerProfile& profile);

/// Named preset ("perfect", "steady", "novice", "absent") or a comma list such
/// as "p=0.9,sigma=40,bias=10,wrong=0.05". Throws InvalidParams.
PlayerProfile parse_player_profile(std::string_view text);

/// Per-trial generator seed from (seed, participant index, trial index), so
/// trial outcomes do not depend on evaluation order.
std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t participant, std::uint64_t trial);

/// Each note struck independently with probability hit_prob at
/// onset + bias + Normal(0, sd), rounded to ms; a struck note goes to a
/// uniformly chosen other dimple with probability wrong_dimple_prob.
std::vector<judge::Strike> generate_strikes(const chart::Chart& chart, const PlayerProfile& profile,
                                            std::mt19937_64& rng);

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// Fixed origin for simulated trial timestamps (2024-01-01T00:00:00Z).
inline constexpr std::int64_t kHeadlessEpochMs = 1704067200000;

struct HeadlessOptions {
  Timestamp origin{std::chrono::milliseconds{kHeadlessEpochMs}};
};

/// Plays every planned trial with a simulated participant. `charts` must
/// contain each planned song, matched by chart::chart_id. Deterministic in
/// `seed`; timestamps are simulated from `options.origin`.
std::vector<TrialResult> run_headless(const SessionPlan& plan, std::span<const chart::Chart> charts,
                                      const PlayerProfile& profile, std::int64_t window_ms, std::uint64_t seed,
                                      const HeadlessOptions& options = {});

std::string iso8601_utc(Timestamp t);

// ---------------------------------------------------------------------------
// Results CSV
// ---------------------------------------------------------------------------

inline constexpr std::string_view kResultsHeader =
    "participant,order_index,interface,song,score,max_score,window_ms,timestamp";

class SchemaError : public Error {
 public:
  using Error::Error;
};

std::string format_results(std::span<const TrialResult> results);
/// An empty document yields no trials; otherwise the header must match
/// exactly. Throws SchemaError.
std::vector<TrialResult> parse_results(std::string_view csv);

/// Throws IoError when the file cannot be written.
void write_results(const std::filesystem::path& path, std::span<const TrialResult> results);
/// Throws IoError or SchemaError.
std::vector<TrialResult> read_results(const std::filesystem::path& path);

}  // namespace handpan::session
