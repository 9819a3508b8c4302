#include "evfilter/window.hpp"

#include <algorithm>
#include <limits>

#include "evfilter/errors.hpp"

namespace evfilter {

void CountTable::add(const std::string& token, std::int64_t delta) {
  if (delta == 0) return;
  auto it = counts_.find(token);
  const std::int64_t old = it == counts_.end() ? 0 : it->second;
  const std::int64_t updated = old + delta;
  if (old > 0) {
    auto h = histogram_.find(old);
    if (--h->second == 0) histogram_.erase(h);
  }
  if (updated > 0) {
    ++histogram_[updated];
    if (it == counts_.end()) {
      counts_.emplace(token, updated);
    } else {
      it->second = updated;
    }
  } else if (it != counts_.end()) {
    counts_.erase(it);
  }
}

std::int64_t CountTable::count(std::string_view token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

std::int64_t CountTable::max_count() const { return histogram_.empty() ? 0 : histogram_.rbegin()->first; }

std::map<std::string, std::int64_t> CountTable::to_map() const { return {counts_.begin(), counts_.end()}; }

void MinMaxTracker::remove(std::int64_t value) {
  auto it = values_.find(value);
  if (it == values_.end()) return;
  if (--it->second == 0) values_.erase(it);
}

SlidingWindow::SlidingWindow(TimestampMs length_ms) : length_ms_(length_ms) {
  if (length_ms <= 0) throw Error("window length must be positive");
}

void SlidingWindow::apply(const WindowRecord& bundle, std::int64_t sign) {
  for (const auto& e : bundle.events) {
    if (auto* t = std::get_if<TokenPayload>(&e.payload)) {
      stats_.token_counts.add(t->token, sign);
    } else if (auto* r = std::get_if<RetweetPayload>(&e.payload)) {
      auto& table = r->original_id ? stats_.retweeted_ids : stats_.retweet_bodies;
      const std::string& key = r->original_id ? *r->original_id : r->normalized_body;
      if (key.empty()) continue;
      if ((table[key] += sign) <= 0) table.erase(key);
    } else if (auto* m = std::get_if<MetadataPayload>(&e.payload)) {
      if (sign > 0) {
        stats_.followers.add(m->followers);
        stats_.friends.add(m->friends);
        stats_.statuses.add(m->statuses);
      } else {
        stats_.followers.remove(m->followers);
        stats_.friends.remove(m->friends);
        stats_.statuses.remove(m->statuses);
      }
    }
  }
  if (!bundle.standalone) {
    const auto length = static_cast<std::int64_t>(bundle.record.text.size());
    if (sign > 0) {
      stats_.text_length.add(length);
    } else {
      stats_.text_length.remove(length);
    }
  }
  event_count_ = static_cast<std::size_t>(static_cast<std::int64_t>(event_count_) +
                                          sign * static_cast<std::int64_t>(bundle.events.size()));
}

void SlidingWindow::apply_prior(const WindowRecord& bundle, std::int64_t sign) {
  for (const auto& e : bundle.events) {
    if (auto* t = std::get_if<TokenPayload>(&e.payload)) stats_.prior_token_counts.add(t->token, sign);
  }
}

void SlidingWindow::insert(WindowRecordPtr bundle) {
  const TimestampMs ts = bundle->record.ts;
  if (!now_ || ts > *now_) {
    evict_expired(ts);
  } else if (ts <= *now_ - length_ms_) {
    throw StaleEvent("event at " + std::to_string(ts) + " is older than window start " +
                     std::to_string(*now_ - length_ms_));
  }
  apply(*bundle, +1);
  auto pos = std::upper_bound(current_.begin(), current_.end(), ts,
                              [](TimestampMs t, const WindowRecordPtr& b) { return t < b->record.ts; });
  current_.insert(pos, std::move(bundle));
}

void SlidingWindow::insert(RawRecord record, std::vector<AtomicEvent> events) {
  insert(std::make_shared<const WindowRecord>(WindowRecord{std::move(record), std::move(events), false}));
}

void SlidingWindow::insert_event(const AtomicEvent& event) {
  WindowRecord bundle;
  bundle.record.id = event.header.source_record_id;
  bundle.record.ts = event.header.ts;
  bundle.events.push_back(event);
  bundle.standalone = true;
  insert(std::make_shared<const WindowRecord>(std::move(bundle)));
}

void SlidingWindow::evict_expired(TimestampMs now) {
  if (now_ && now < *now_) return;
  now_ = now;
  const TimestampMs current_start = now - length_ms_;
  while (!current_.empty() && current_.front()->record.ts <= current_start) {
    apply(*current_.front(), -1);
    apply_prior(*current_.front(), +1);
    lagged_.push_back(std::move(current_.front()));
    current_.pop_front();
  }
  const TimestampMs lagged_start = now - 2 * length_ms_;
  while (!lagged_.empty() && lagged_.front()->record.ts <= lagged_start) {
    apply_prior(*lagged_.front(), -1);
    lagged_.pop_front();
  }
}

WindowSnapshot SlidingWindow::snapshot(std::int64_t index) const {
  auto state = std::make_shared<WindowSnapshot::State>();
  state->index = index;
  state->boundary_ts = now_.value_or(0);
  state->length_ms = length_ms_;
  state->stats = stats_;
  state->records.reserve(current_.size());
  for (const auto& b : current_) {
    if (!b->standalone) state->records.push_back(b);
  }
  WindowSnapshot snap;
  snap.state_ = std::move(state);
  return snap;
}

double token_score(const WindowStats& stats, std::string_view token) {
  const auto max_count = stats.token_counts.max_count();
  if (max_count == 0) return 0.0;
  return static_cast<double>(stats.token_counts.count(token)) / static_cast<double>(max_count);
}

double frequency_variation(std::int64_t count_now, std::int64_t count_prev) {
  const auto total = count_now + count_prev;
  if (total == 0) return 0.5;
  const double v = static_cast<double>(count_now - count_prev) / static_cast<double>(total);
  return (v + 1.0) / 2.0;
}

double frequency_variation(const WindowStats& stats, std::string_view token) {
  return frequency_variation(stats.token_counts.count(token), stats.prior_token_counts.count(token));
}

double scale_normalize(double x, double lo, double hi) {
  if (hi <= lo) return 0.5;
  return std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
}

}  // namespace evfilter
