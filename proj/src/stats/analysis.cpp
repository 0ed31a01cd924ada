#include "handpan/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <tuple>

namespace handpan::stats {

namespace {

using session::TrialResult;

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

template <typename Key>
std::vector<Key> first_seen(std::span<const TrialResult> results, Key (*key)(const TrialResult&)) {
  std::vector<Key> out;
  for (const auto& r : results) {
    Key k = key(r);
    if (std::find(out.begin(), out.end(), k) == out.end()) {
      out.push_back(std::move(k));
    }
  }
  return out;
}

std::string participant_of(const TrialResult& r) { return r.participant; }
std::string song_of(const TrialResult& r) { return r.song_id; }

std::vector<layouts::InterfaceKind> interfaces_present(std::span<const TrialResult> results) {
  std::vector<layouts::InterfaceKind> out;
  for (auto kind : layouts::kAllInterfaces) {
    if (std::any_of(results.begin(), results.end(), [&](const TrialResult& r) { return r.interface == kind; })) {
      out.push_back(kind);
    }
  }
  return out;
}

// Builds a table from rows keyed by `row_key`, columns keyed by `col_key`,
// summing (or averaging) the remaining factor.
template <typename RowKey, typename ColKey>
ScoreTable build_table(std::span<const TrialResult> results, const std::vector<RowKey>& rows,
                       const std::vector<ColKey>& cols, const std::vector<std::string>& row_names,
                       const std::vector<std::string>& col_names, RowKey (*row_key)(const TrialResult&),
                       ColKey (*col_key)(const TrialResult&), bool average) {
  std::set<std::tuple<std::string, int, std::string>> seen;
  for (const auto& r : results) {
    if (!seen.emplace(r.participant, static_cast<int>(r.interface), r.song_id).second) {
      throw IncompleteTable("duplicate trial for " + r.participant + " / " +
                            std::string(layouts::kind_name(r.interface)) + " / " + r.song_id);
    }
  }

  ScoreTable table;
  table.subjects = row_names;
  table.conditions = col_names;
  std::vector<std::vector<double>> sum(rows.size(), std::vector<double>(cols.size(), 0.0));
  std::vector<std::vector<int>> count(rows.size(), std::vector<int>(cols.size(), 0));
  for (const auto& r : results) {
    const auto i = static_cast<std::size_t>(std::find(rows.begin(), rows.end(), row_key(r)) - rows.begin());
    const auto j = static_cast<std::size_t>(std::find(cols.begin(), cols.end(), col_key(r)) - cols.begin());
    sum[i][j] += r.score;
    ++count[i][j];
  }
  std::size_t expected = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (count[i][j] == 0) {
        throw IncompleteTable("missing cell " + row_names[i] + " x " + col_names[j]);
      }
      if (expected == 0) {
        expected = static_cast<std::size_t>(count[i][j]);
      } else if (static_cast<std::size_t>(count[i][j]) != expected) {
        throw IncompleteTable("unbalanced design at " + row_names[i] + " x " + col_names[j]);
      }
      if (average) {
        sum[i][j] /= count[i][j];
      }
    }
  }
  table.values = std::move(sum);
  return table;
}

std::string interface_label(const TrialResult& r) { return std::string(layouts::kind_name(r.interface)); }
std::string participant_song(const TrialResult& r) { return r.participant + "/" + r.song_id; }
std::string participant_interface(const TrialResult& r) {
  return r.participant + "/" + std::string(layouts::kind_name(r.interface));
}

void append_anova(std::string& out, std::string_view factor, const ScoreTable& table, Aggregation agg,
                  const std::optional<AnovaResult>& anova) {
  out += "Repeated-measures ANOVA: " + std::string(factor) + " on Score\n";
  out += "  subjects: " + std::to_string(table.n()) + ", conditions: " + std::to_string(table.k()) +
         ", aggregation: " + std::string(aggregation_name(agg)) + "\n";
  if (!anova) {
    out += "  F undefined (zero error variance)\n";
    return;
  }
  const auto& a = *anova;
  out += "  F(" + std::to_string(a.df1) + "," + std::to_string(a.df2) + ") = " + fmt("%.4f", a.f) +
         ", p = " + fmt("%.4f", a.p) + ", eta_G = " + fmt("%.4f", a.eta_g) + "\n";
  out += "  SS condition = " + fmt("%.6f", a.ss_cond) + ", subject = " + fmt("%.6f", a.ss_subj) +
         ", error = " + fmt("%.6f", a.ss_err) + ", total = " + fmt("%.6f", a.ss_total) + "\n";
  const double residual = std::abs(a.ss_cond + a.ss_subj + a.ss_err - a.ss_total) /
                          std::max(a.ss_total, 1e-300);
  out += "  decomposition check: " + std::string(residual <= 1e-9 ? "ok" : "FAILED") + "\n";
  out += "  caveat: " + a.caveat + "\n";
}

std::optional<AnovaResult> anova_or_undefined(const ScoreTable& table) {
  try {
    return rm_anova(table);
  } catch (const ZeroErrorVariance&) {
    return std::nullopt;
  }
}

}  // namespace

std::string_view aggregation_name(Aggregation agg) {
  switch (agg) {
    case Aggregation::Sum: return "sum";
    case Aggregation::Mean: return "mean";
    case Aggregation::PerSong: return "per-song";
  }
  return "sum";
}

Aggregation parse_aggregation(std::string_view name) {
  for (auto a : {Aggregation::Sum, Aggregation::Mean, Aggregation::PerSong}) {
    if (aggregation_name(a) == name) {
      return a;
    }
  }
  throw InvalidParams("unknown aggregation '" + std::string(name) + "' (sum, mean, per-song)");
}

ScoreTable interface_table(std::span<const TrialResult> results, Aggregation agg) {
  const auto kinds = interfaces_present(results);
  std::vector<std::string> cols;
  for (auto k : kinds) cols.emplace_back(layouts::kind_name(k));

  if (agg == Aggregation::PerSong) {
    const auto rows = first_seen<std::string>(results, &participant_song);
    return build_table<std::string, std::string>(results, rows, cols, rows, cols, &participant_song,
                                                 &interface_label, false);
  }
  const auto rows = first_seen<std::string>(results, &participant_of);
  return build_table<std::string, std::string>(results, rows, cols, rows, cols, &participant_of, &interface_label,
                                               agg == Aggregation::Mean);
}

ScoreTable song_table(std::span<const TrialResult> results, Aggregation agg) {
  const auto songs = first_seen<std::string>(results, &song_of);
  if (agg == Aggregation::PerSong) {
    const auto rows = first_seen<std::string>(results, &participant_interface);
    return build_table<std::string, std::string>(results, rows, songs, rows, songs, &participant_interface, &song_of,
                                                 false);
  }
  const auto rows = first_seen<std::string>(results, &participant_of);
  return build_table<std::string, std::string>(results, rows, songs, rows, songs, &participant_of, &song_of,
                                               agg == Aggregation::Mean);
}

Analysis analyze(std::span<const TrialResult> results, Aggregation agg, double alpha) {
  if (results.empty()) {
    throw NoTrials();
  }
  Analysis out;
  out.interfaces = interface_table(results, agg);
  out.interface_anova = anova_or_undefined(out.interfaces);
  out.posthoc = posthoc_all(out.interfaces, alpha);
  if (first_seen<std::string>(results, &song_of).size() >= 2) {
    out.songs = song_table(results, agg);
    out.song_anova = anova_or_undefined(*out.songs);
  }

  std::string& text = out.report;
  append_anova(text, "Interface", out.interfaces, agg, out.interface_anova);

  text += "\nDescriptives (Score, error bars +/-1 SD)\n";
  out.plot_data = "interface,n,mean,sd\n";
  for (std::size_t j = 0; j < out.interfaces.k(); ++j) {
    const auto col = out.interfaces.column(j);
    const double m = mean(col);
    const double sd = sample_sd(col);
    char line[160];
    std::snprintf(line, sizeof line, "  %-26s M = %10.4f  SD = %10.4f\n", out.interfaces.conditions[j].c_str(), m, sd);
    text += line;
    out.plot_data += out.interfaces.conditions[j] + "," + std::to_string(col.size()) + "," + fmt("%.6f", m) + "," +
                     fmt("%.6f", sd) + "\n";
  }

  text += "\nPost-hoc paired t-tests, Bonferroni m = " + std::to_string(out.posthoc.m) + ", alpha = " +
          fmt("%.4g", alpha) + "\n";
  for (const auto& t : out.posthoc.tests) {
    text += "  " + out.interfaces.conditions[t.a] + " vs " + out.interfaces.conditions[t.b] + ": t(" +
            std::to_string(t.result.df) + ") = " + fmt("%.4f", t.result.t) + ", p = " +
            fmt("%.4f", t.result.p_two_sided) + ", p_adj = " + fmt("%.4f", t.p_adjusted);
    if (t.significant) text += " *";
    if (t.degenerate) text += " [zero-variance differences]";
    text += "\n";
  }

  if (out.songs) {
    text += "\n";
    append_anova(text, "Song", *out.songs, agg, out.song_anova);
  }
  return out;
}

}  // namespace handpan::stats
