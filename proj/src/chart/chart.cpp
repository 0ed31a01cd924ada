#include "handpan/chart.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace handpan::chart {

namespace {

constexpr std::string_view kMagic = "#CHART v1";

std::string join_violations(const std::vector<Violation>& violations) {
  std::string out = "chart invariant violated";
  for (const auto& v : violations) {
    out += "; ";
    out += v.describe();
  }
  return out;
}

bool is_text_ok(std::string_view text) {
  if (text.empty()) {
    return false;
  }
  return std::all_of(text.begin(), text.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x20 && u < 0x7f;
  });
}

// Strict unsigned decimal: digits only, no sign, no leading whitespace.
template <typename Int>
bool parse_uint(std::string_view token, Int& out) {
  if (token.empty() || !std::all_of(token.begin(), token.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return false;
  }
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc{} && ptr == token.data() + token.size();
}

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    const std::size_t next = line.find(' ', pos);
    if (next == std::string_view::npos) {
      tokens.push_back(line.substr(pos));
      break;
    }
    tokens.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return tokens;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

}  // namespace

std::size_t Chart::note_count() const {
  std::size_t total = 0;
  for (const auto& p : patterns) {
    total += p.notes.size();
  }
  return total;
}

std::vector<Note> Chart::notes() const {
  std::vector<Note> all;
  all.reserve(note_count());
  for (const auto& p : patterns) {
    all.insert(all.end(), p.notes.begin(), p.notes.end());
  }
  return all;
}

std::string_view rule_name(Rule rule) {
  switch (rule) {
    case Rule::NoPatterns: return "NoPatterns";
    case Rule::EmptyPattern: return "EmptyPattern";
    case Rule::PatternIndexOutOfRange: return "PatternIndexOutOfRange";
    case Rule::DimpleOutOfRange: return "DimpleOutOfRange";
    case Rule::NegativeOnset: return "NegativeOnset";
    case Rule::NonMonotoneOnset: return "NonMonotoneOnset";
    case Rule::DuplicateChordDimple: return "DuplicateChordDimple";
    case Rule::NonDenseIds: return "NonDenseIds";
    case Rule::BadText: return "BadText";
  }
  return "Unknown";
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << rule_name(rule);
  if (note_id >= 0) {
    os << " at note id " << note_id;
  } else if (pattern_index >= 0) {
    os << " at pattern " << pattern_index;
  }
  if (!detail.empty()) {
    os << " (" << detail << ")";
  }
  return os.str();
}

SyntaxError::SyntaxError(std::size_t line, std::string reason)
    : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(std::move(reason)) {}

SemanticError::SemanticError(std::vector<Violation> violations)
    : Error(join_violations(violations)), violations_(std::move(violations)) {}

std::vector<Violation> validate_chart(const Chart& chart) {
  std::vector<Violation> out;
  if (!is_text_ok(chart.title)) {
    out.push_back({Rule::BadText, -1, -1, "title must be non-empty printable ASCII"});
  }
  if (!is_text_ok(chart.scale_name)) {
    out.push_back({Rule::BadText, -1, -1, "scale must be non-empty printable ASCII"});
  }
  if (chart.patterns.empty()) {
    out.push_back({Rule::NoPatterns, -1, -1, {}});
    return out;
  }

  int expected_id = 0;
  bool have_prev = false;
  std::int64_t prev_onset = 0;
  std::set<int> chord_dimples;
  for (const auto& pattern : chart.patterns) {
    if (pattern.index < 1) {
      out.push_back({Rule::PatternIndexOutOfRange, -1, pattern.index, "index must be >= 1"});
    }
    if (pattern.notes.empty()) {
      out.push_back({Rule::EmptyPattern, -1, pattern.index, {}});
    }
    for (const auto& note : pattern.notes) {
      if (note.id != expected_id) {
        out.push_back({Rule::NonDenseIds, note.id, pattern.index, "expected id " + std::to_string(expected_id)});
      }
      ++expected_id;
      if (note.dimple < 0 || note.dimple >= kDimpleCount) {
        out.push_back({Rule::DimpleOutOfRange, note.id, pattern.index, "dimple " + std::to_string(note.dimple)});
      }
      if (note.onset_ms < 0) {
        out.push_back({Rule::NegativeOnset, note.id, pattern.index, {}});
      }
      if (have_prev && note.onset_ms < prev_onset) {
        out.push_back({Rule::NonMonotoneOnset, note.id, pattern.index,
                       std::to_string(note.onset_ms) + " after " + std::to_string(prev_onset)});
      }
      if (!have_prev || note.onset_ms != prev_onset) {
        chord_dimples.clear();
      }
      if (!chord_dimples.insert(note.dimple).second) {
        out.push_back({Rule::DuplicateChordDimple, note.id, pattern.index,
                       "dimple " + std::to_string(note.dimple) + " at " + std::to_string(note.onset_ms)});
      }
      have_prev = true;
      prev_onset = note.onset_ms;
    }
  }
  return out;
}

Chart parse_chart(std::string_view text) {
  Chart chart;
  bool have_title = false;
  bool have_scale = false;
  int next_id = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    if (line.find('\r') != std::string_view::npos) {
      throw SyntaxError(line_no, "carriage return; documents use LF line endings");
    }
    if (line_no == 1) {
      if (line != kMagic) {
        throw SyntaxError(line_no, "expected '#CHART v1'");
      }
      continue;
    }
    if (line.empty() || line.front() == ';') {
      continue;
    }

    if (!have_title) {
      if (!starts_with(line, "#TITLE ") || line.size() == 7) {
        throw SyntaxError(line_no, "expected '#TITLE <text>'");
      }
      chart.title = std::string(line.substr(7));
      have_title = true;
      continue;
    }
    if (!have_scale) {
      if (!starts_with(line, "#SCALE ") || line.size() == 7) {
        throw SyntaxError(line_no, "expected '#SCALE <text>'");
      }
      chart.scale_name = std::string(line.substr(7));
      have_scale = true;
      continue;
    }

    if (starts_with(line, "#PATTERN")) {
      const auto tokens = split_spaces(line);
      int index = 0;
      if (tokens.size() != 2 || tokens[0] != "#PATTERN" || !parse_uint(tokens[1], index)) {
        throw SyntaxError(line_no, "expected '#PATTERN <int>'");
      }
      if (index < 1) {
        throw SyntaxError(line_no, "pattern index must be >= 1");
      }
      if (!chart.patterns.empty() && chart.patterns.back().notes.empty()) {
        throw SyntaxError(line_no, "pattern " + std::to_string(chart.patterns.back().index) + " has no notes");
      }
      chart.patterns.push_back(Pattern{index, {}});
      continue;
    }

    if (starts_with(line, "N ")) {
      const auto tokens = split_spaces(line);
      int dimple = 0;
      std::int64_t onset = 0;
      if (tokens.size() != 3 || !parse_uint(tokens[1], dimple) || !parse_uint(tokens[2], onset)) {
        throw SyntaxError(line_no, "expected 'N <dimple> <onset_ms>'");
      }
      if (chart.patterns.empty()) {
        throw SyntaxError(line_no, "note before any #PATTERN");
      }
      chart.patterns.back().notes.push_back(Note{dimple, onset, next_id++});
      continue;
    }

    throw SyntaxError(line_no, "unrecognized line");
  }

  if (line_no == 0) {
    throw SyntaxError(1, "empty document");
  }
  if (!have_title) {
    throw SyntaxError(line_no, "missing #TITLE");
  }
  if (!have_scale) {
    throw SyntaxError(line_no, "missing #SCALE");
  }
  if (chart.patterns.empty()) {
    throw SyntaxError(line_no, "no #PATTERN");
  }
  if (chart.patterns.back().notes.empty()) {
    throw SyntaxError(line_no, "pattern " + std::to_string(chart.patterns.back().index) + " has no notes");
  }

  auto violations = validate_chart(chart);
  if (!violations.empty()) {
    throw SemanticError(std::move(violations));
  }
  return chart;
}

std::string serialize_chart(const Chart& chart) {
  std::string out;
  out += kMagic;
  out += "\n#TITLE " + chart.title + "\n#SCALE " + chart.scale_name + "\n";
  for (const auto& pattern : chart.patterns) {
    out += "#PATTERN " + std::to_string(pattern.index) + "\n";
    for (const auto& note : pattern.notes) {
      out += "N " + std::to_string(note.dimple) + " " + std::to_string(note.onset_ms) + "\n";
    }
  }
  return out;
}

Chart load_chart_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open chart file " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_chart(buffer.str());
}

std::string chart_id(const Chart& chart) {
  std::string id = chart.title;
  for (char& c : id) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!keep) {
      c = '_';
    }
  }
  return id;
}

}  // namespace handpan::chart
