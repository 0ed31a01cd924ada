#include <charconv>
#include <fstream>
#include <sstream>

#include "handpan/session.hpp"

namespace handpan::session {

namespace {

constexpr std::size_t kColumns = 8;

void check_field(const std::string& value, std::string_view column) {
  if (value.empty() || value.find_first_of(",\r\n\"") != std::string::npos) {
    throw InvalidParams("results field '" + std::string(column) + "' must be non-empty without commas, quotes or newlines: '" +
                        value + "'");
  }
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

template <typename Int>
Int int_field(std::string_view token, std::size_t line_no, std::string_view column) {
  Int v{};
  const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (token.empty() || res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw SchemaError("line " + std::to_string(line_no) + ": column '" + std::string(column) +
                      "' is not an integer: '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

std::string format_results(std::span<const TrialResult> results) {
  std::ostringstream os;
  os << kResultsHeader << '\n';
  for (const auto& r : results) {
    check_field(r.participant, "participant");
    check_field(r.song_id, "song");
    check_field(r.timestamp, "timestamp");
    os << r.participant << ',' << r.order_index << ',' << layouts::kind_name(r.interface) << ',' << r.song_id << ','
       << r.score << ',' << r.max_score << ',' << r.window_ms << ',' << r.timestamp << '\n';
  }
  return os.str();
}

std::vector<TrialResult> parse_results(std::string_view csv) {
  std::vector<TrialResult> results;
  if (csv.find_first_not_of(" \t\r\n") == std::string_view::npos) {
    return results;
  }
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view line = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (!header_seen) {
      if (line != kResultsHeader) {
        throw SchemaError("unexpected header '" + std::string(line) + "'; expected '" + std::string(kResultsHeader) +
                          "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const auto f = split_commas(line);
    if (f.size() != kColumns) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(kColumns) + " columns, got " +
                        std::to_string(f.size()));
    }
    TrialResult r;
    r.participant = std::string(f[0]);
    r.order_index = int_field<int>(f[1], line_no, "order_index");
    try {
      r.interface = layouts::parse_kind(f[2]);
    } catch (const InvalidParams& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
    }
    r.song_id = std::string(f[3]);
    r.score = int_field<int>(f[4], line_no, "score");
    r.max_score = int_field<int>(f[5], line_no, "max_score");
    r.window_ms = int_field<std::int64_t>(f[6], line_no, "window_ms");
    r.timestamp = std::string(f[7]);
    if (r.participant.empty() || r.song_id.empty() || r.score < 0 || r.score > r.max_score) {
      throw SchemaError("line " + std::to_string(line_no) + ": invalid trial values");
    }
    results.push_back(std::move(r));
  }
  if (!header_seen) {
    throw SchemaError("missing header");
  }
  return results;
}

void write_results(const std::filesystem::path& path, std::span<const TrialResult> results) {
  const std::string text = format_results(results);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << text;
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::vector<TrialResult> read_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_results(buffer.str());
}

}  // namespace handpan::session
