#include <algorithm>
#include <set>
#include <sstream>

#include "handpan/session.hpp"

namespace handpan::session {

namespace {

// Williams first row 0, 1, k-1, 2, k-2, ...; row i adds i mod k.
OrderMatrix williams_rows(int k) {
  std::vector<int> first;
  first.reserve(static_cast<std::size_t>(k));
  int lo = 1;
  int hi = k - 1;
  first.push_back(0);
  for (int j = 1; j < k; ++j) {
    first.push_back(j % 2 == 1 ? lo++ : hi--);
  }
  OrderMatrix rows;
  for (int i = 0; i < k; ++i) {
    std::vector<int> row;
    row.reserve(first.size());
    for (int c : first) {
      row.push_back((c + i) % k);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

OrderMatrix balanced_latin_square(int k) {
  if (k <= 0) {
    throw InvalidParams("Latin square order must be positive");
  }
  if (k % 2 != 0) {
    throw OddOrderUnsupported(k);
  }
  return williams_rows(k);
}

OrderMatrix balanced_latin_square_odd(int k) {
  if (k <= 0 || k % 2 == 0) {
    throw InvalidParams("balanced_latin_square_odd needs a positive odd order");
  }
  OrderMatrix rows = williams_rows(k);
  const std::size_t base = rows.size();
  for (std::size_t i = 0; i < base; ++i) {
    rows.emplace_back(rows[i].rbegin(), rows[i].rend());
  }
  return rows;
}

SessionPlan plan_session(std::span<const std::string> participant_ids,
                         std::span<const layouts::InterfaceKind> interfaces, std::span<const std::string> songs) {
  if (participant_ids.empty()) {
    throw InvalidParams("a session plan needs at least one participant");
  }
  if (interfaces.empty() || songs.empty()) {
    throw InvalidParams("a session plan needs at least one interface and one song");
  }
  if (std::set<std::string>(participant_ids.begin(), participant_ids.end()).size() != participant_ids.size()) {
    throw InvalidParams("participant ids must be unique");
  }

  SessionPlan plan;
  plan.participants.assign(participant_ids.begin(), participant_ids.end());
  for (auto kind : interfaces) {
    for (const auto& song : songs) {
      plan.conditions.push_back(Condition{kind, song});
    }
  }

  const int k = static_cast<int>(interfaces.size());
  const OrderMatrix square = k % 2 == 0 ? balanced_latin_square(k) : balanced_latin_square_odd(k);
  const int song_count = static_cast<int>(songs.size());
  for (std::size_t p = 0; p < participant_ids.size(); ++p) {
    const auto& interface_order = square[p % square.size()];
    std::vector<int> row;
    row.reserve(plan.conditions.size());
    for (int iface : interface_order) {
      for (int s = 0; s < song_count; ++s) {
        const int song = p % 2 == 0 ? s : song_count - 1 - s;
        row.push_back(iface * song_count + song);
      }
    }
    plan.order.push_back(std::move(row));
  }
  return plan;
}

std::string serialize_plan(const SessionPlan& plan) {
  std::ostringstream os;
  for (std::size_t p = 0; p < plan.participants.size(); ++p) {
    os << plan.participants[p] << ':';
    for (int c : plan.order[p]) {
      os << ' ' << c;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace handpan::session
