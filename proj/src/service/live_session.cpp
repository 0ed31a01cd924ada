#include <algorithm>
#include <cmath>
#include <numeric>

#include "handpan/service.hpp"

namespace handpan::service {

LiveSession::LiveSession(chart::Chart chart, layouts::LayoutGeometry layout, LiveOptions options)
    : chart_(std::move(chart)), layout_(std::move(layout)), options_(std::move(options)) {
  if (options_.window_ms <= 0) {
    throw InvalidParams("window_ms must be positive");
  }
  if (options_.commit_grace_ms < 0 || options_.lead_in_ms < 0) {
    throw InvalidParams("commit grace and lead-in must be non-negative");
  }
  notes_ = chart_.notes();
  lanes_.assign(chart::kDimpleCount, {});
  lane_cursor_.assign(chart::kDimpleCount, 0);
  last_strike_.assign(chart::kDimpleCount, std::nullopt);
  resolved_.assign(notes_.size(), false);
  unresolved_ = notes_.size();

  by_onset_.resize(notes_.size());
  std::iota(by_onset_.begin(), by_onset_.end(), std::size_t{0});
  std::stable_sort(by_onset_.begin(), by_onset_.end(),
                   [&](std::size_t a, std::size_t b) { return notes_[a].onset_ms < notes_[b].onset_ms; });
  for (std::size_t id : by_onset_) {
    lanes_[static_cast<std::size_t>(notes_[id].dimple)].push_back(id);
  }
}

ClockSync LiveSession::clock_sync() const {
  if (frozen_sync_) return *frozen_sync_;
  return pings_.best().value_or(ClockSync{});
}

std::vector<ServerMessage> LiveSession::handle(const ClientMessage& message, std::int64_t now_ms) {
  if (phase_ == Phase::Ended) {
    return {};
  }
  if (const auto* hello = std::get_if<msg::ClientHello>(&message)) {
    if (phase_ != Phase::AwaitHello) {
      throw ProtocolViolation("HELLO repeated");
    }
    participant_ = hello->name;
    phase_ = Phase::Syncing;
    return {msg::ServerHello{}};
  }
  if (phase_ == Phase::AwaitHello) {
    throw ProtocolViolation("expected HELLO first");
  }
  if (const auto* ping = std::get_if<msg::Ping>(&message)) {
    if (phase_ == Phase::Syncing) {
      pings_.on_ping(ping->t_client, now_ms);
    }
    return {msg::Pong{ping->t_client, now_ms}};
  }
  if (std::holds_alternative<msg::Ready>(message)) {
    if (phase_ != Phase::Syncing) {
      throw ProtocolViolation("READY repeated");
    }
    return start(now_ms);
  }
  const auto& s = std::get<msg::Strike>(message);
  if (phase_ != Phase::Running) {
    throw ProtocolViolation("STRIKE before START");
  }
  auto out = commit_misses(now_ms);
  auto more = strike(s, now_ms);
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  return out;
}

std::vector<ServerMessage> LiveSession::start(std::int64_t now_ms) {
  frozen_sync_ = pings_.best().value_or(ClockSync{});
  // Leave room for the first note to travel the whole highway.
  const std::int64_t first_onset = notes_.empty() ? 0 : notes_[by_onset_.front()].onset_ms;
  const auto travel = static_cast<std::int64_t>(std::ceil(layout_.travel_time_ms));
  t0_ms_ = now_ms + std::max(options_.lead_in_ms, travel - first_onset);
  phase_ = Phase::Running;
  return {msg::Layout{layout_.kind, layouts::serialize_layout(layout_)}, msg::Start{t0_ms_}};
}

std::vector<ServerMessage> LiveSession::strike(const msg::Strike& s, std::int64_t now_ms) {
  const double server_t = static_cast<double>(s.t_client_ms) + frozen_sync_->offset_ms;
  const std::int64_t t = std::llround(server_t) - options_.latency_compensation_ms - t0_ms_;
  const std::int64_t now_chart = now_ms - t0_ms_;
  const auto d = static_cast<std::size_t>(s.dimple);

  // A strike is judged only if no note it could match has been committed
  // and it is not earlier than a strike already judged on its dimple; both
  // keep the arrival-order scan identical to the batch matcher.
  if (t <= now_chart - options_.commit_grace_ms || (last_strike_[d] && t < *last_strike_[d])) {
    ++late_strikes_;
    return {};
  }
  last_strike_[d] = t;
  strike_log_.push_back(judge::Strike{s.dimple, t, judge::StrikeSource::UI});

  const auto& lane = lanes_[d];
  std::size_t& cursor = lane_cursor_[d];
  while (cursor < lane.size() &&
         (resolved_[lane[cursor]] || notes_[lane[cursor]].onset_ms < t - options_.window_ms)) {
    ++cursor;
  }
  for (std::size_t i = cursor; i < lane.size(); ++i) {
    const std::size_t id = lane[i];
    if (notes_[id].onset_ms > t + options_.window_ms) break;
    if (resolved_[id]) continue;
    resolved_[id] = true;
    --unresolved_;
    ++hits_;
    std::vector<ServerMessage> out{msg::Judge{static_cast<int>(id), true, t - notes_[id].onset_ms},
                                   msg::Score{hits_, total()}};
    if (unresolved_ == 0) {
      phase_ = Phase::Ended;
      out.emplace_back(msg::End{});
    }
    return out;
  }
  return {};
}

std::vector<ServerMessage> LiveSession::commit_misses(std::int64_t now_ms) {
  std::vector<ServerMessage> out;
  if (phase_ != Phase::Running) return out;
  const std::int64_t now_chart = now_ms - t0_ms_;
  const std::int64_t lag = options_.window_ms + options_.commit_grace_ms;
  while (miss_cursor_ < by_onset_.size() && notes_[by_onset_[miss_cursor_]].onset_ms + lag <= now_chart) {
    const std::size_t id = by_onset_[miss_cursor_++];
    if (resolved_[id]) continue;
    resolved_[id] = true;
    --unresolved_;
    out.emplace_back(msg::Judge{static_cast<int>(id), false, 0});
  }
  if (!out.empty()) {
    out.emplace_back(msg::Score{hits_, total()});
    if (unresolved_ == 0) {
      phase_ = Phase::Ended;
      out.emplace_back(msg::End{});
    }
  }
  return out;
}

std::vector<ServerMessage> LiveSession::tick(std::int64_t now_ms) { return commit_misses(now_ms); }

std::optional<std::int64_t> LiveSession::next_deadline() const {
  if (phase_ != Phase::Running) return std::nullopt;
  for (std::size_t i = miss_cursor_; i < by_onset_.size(); ++i) {
    const std::size_t id = by_onset_[i];
    if (!resolved_[id]) {
      return t0_ms_ + notes_[id].onset_ms + options_.window_ms + options_.commit_grace_ms;
    }
  }
  return std::nullopt;
}

}  // namespace handpan::service
