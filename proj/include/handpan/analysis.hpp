#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "handpan/session.hpp"
#include "handpan/stats.hpp"

namespace handpan::stats {

enum class Aggregation {
  Sum,      // one row per participant, songs summed
  Mean,     // one row per participant, songs averaged
  PerSong,  // one row per (participant, song)
};

std::string_view aggregation_name(Aggregation agg);
Aggregation parse_aggregation(std::string_view name);

/// Participants x interfaces. Throws IncompleteTable when a cell is missing
/// or a (participant, interface, song) trial appears twice.
ScoreTable interface_table(std::span<const session::TrialResult> results, Aggregation agg);

/// Participants x songs, interfaces aggregated the same way (PerSong gives
/// one row per (participant, interface)).
ScoreTable song_table(std::span<const session::TrialResult> results, Aggregation agg);

class NoTrials : public Error {
 public:
  NoTrials() : Error("no trials") {}
};

struct Analysis {
  ScoreTable interfaces;
  std::optional<AnovaResult> interface_anova;  // nullopt when F is undefined
  PosthocResult posthoc;
  std::optional<ScoreTable> songs;  // only with two or more songs
  std::optional<AnovaResult> song_anova;
  std::string report;     // text in the customary F(df1,df2), p, eta_G style
  std::string plot_data;  // interface,n,mean,sd
};

Analysis analyze(std::span<const session::TrialResult> results, Aggregation agg, double alpha = 0.05);

}  // namespace handpan::stats
