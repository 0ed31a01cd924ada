#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "handpan/error.hpp"

namespace handpan::chart {

inline constexpr int kDimpleCount = 8;

struct Note {
  int dimple = 0;
  std::int64_t onset_ms = 0;
  int id = 0;

  friend bool operator==(const Note&, const Note&) = default;
};

struct Pattern {
  int index = 1;
  std::vector<Note> notes;

  friend bool operator==(const Pattern&, const Pattern&) = default;
};

struct Chart {
  std::string title;
  std::string scale_name;
  std::vector<Pattern> patterns;

  std::size_t note_count() const;

  // Notes of all patterns concatenated, in id order.
  std::vector<Note> notes() const;

  friend bool operator==(const Chart&, const Chart&) = default;
};

enum class Rule {
  NoPatterns,
  EmptyPattern,
  PatternIndexOutOfRange,
  DimpleOutOfRange,
  NegativeOnset,
  NonMonotoneOnset,
  DuplicateChordDimple,
  NonDenseIds,
  BadText,
};

std::string_view rule_name(Rule rule);

struct Violation {
  Rule rule;
  int note_id = -1;       // -1 when the rule concerns a pattern or the header
  int pattern_index = -1;
  std::string detail;

  std::string describe() const;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::string reason);
  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class SemanticError : public Error {
 public:
  explicit SemanticError(std::vector<Violation> violations);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Parses a `#CHART v1` document. Note ids are assigned densely in file order.
/// Throws SyntaxError for grammar violations and SemanticError when the parsed
/// chart breaks an invariant (see validate_chart).
Chart parse_chart(std::string_view text);

/// Canonical document: header, then `#PATTERN`/`N` lines, LF endings, no comments.
std::string serialize_chart(const Chart& chart);

/// Empty iff every chart invariant holds.
std::vector<Violation> validate_chart(const Chart& chart);

Chart load_chart_file(const std::filesystem::path& path);

/// song_a, song_b and scale_warmup, in that order.
std::vector<Chart> builtin_charts();

/// Looks up a builtin chart by id ("song_a", "song_b", "scale_warmup").
/// Throws InvalidParams for unknown ids.
Chart builtin_chart(std::string_view id);

/// Stable id for a builtin chart title, or the title itself.
std::string chart_id(const Chart& chart);

/// Bundled file text for a builtin chart: the canonical document preceded by
/// comment lines describing how the melody was synthesized.
std::string bundled_chart_document(std::string_view id);

}  // namespace handpan::chart
