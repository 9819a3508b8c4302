#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "evfilter/events.hpp"
#include "evfilter/record.hpp"

namespace evfilter {

inline constexpr TimestampMs kDefaultWindowMs = 120'000;
inline constexpr TimestampMs kDefaultSlideMs = 10'000;

// A record together with the events mapped from it. The window's storage
// unit; shared between the live window and its snapshots.
struct WindowRecord {
  RawRecord record;
  std::vector<AtomicEvent> events;
  // Set for bundles created by SlidingWindow::insert_event around a lone
  // event. Such bundles carry no real record and are not visible through
  // WindowSnapshot::records().
  bool standalone = false;
};

using WindowRecordPtr = std::shared_ptr<const WindowRecord>;

// token -> count, with O(log n) access to the largest count.
class CountTable {
 public:
  void add(const std::string& token, std::int64_t delta);
  std::int64_t count(std::string_view token) const;
  std::int64_t max_count() const;
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }

  // Ordered copy, for comparisons and tests.
  std::map<std::string, std::int64_t> to_map() const;

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, std::int64_t, Hash, std::equal_to<>> counts_;
  std::map<std::int64_t, std::int64_t> histogram_;  // count -> number of tokens with that count
};

// Multiset of values with min/max.
class MinMaxTracker {
 public:
  void add(std::int64_t value) { ++values_[value]; }
  void remove(std::int64_t value);
  bool empty() const { return values_.empty(); }
  std::int64_t lo() const { return values_.begin()->first; }
  std::int64_t hi() const { return values_.rbegin()->first; }

 private:
  std::map<std::int64_t, std::int64_t> values_;
};

// Statistics kept for the events of one window.
struct WindowStats {
  CountTable token_counts;
  // Token counts of the window that ended one window length ago.
  CountTable prior_token_counts;
  MinMaxTracker followers;
  MinMaxTracker friends;
  MinMaxTracker statuses;
  MinMaxTracker text_length;
  // Retweet events by original id, and by body for retweets without one.
  std::unordered_map<std::string, std::int64_t> retweeted_ids;
  std::unordered_map<std::string, std::int64_t> retweet_bodies;
};

// Immutable view of a window at a slide boundary. Cheap to copy.
class WindowSnapshot {
 public:
  WindowSnapshot() = default;

  std::int64_t index() const { return state_->index; }
  TimestampMs boundary_ts() const { return state_->boundary_ts; }
  TimestampMs length_ms() const { return state_->length_ms; }
  TimestampMs start_ts() const { return state_->boundary_ts - state_->length_ms; }
  const WindowStats& stats() const { return state_->stats; }
  // Records inside (start, boundary], in timestamp order.
  std::span<const WindowRecordPtr> records() const { return state_->records; }

 private:
  friend class SlidingWindow;
  struct State {
    std::int64_t index = 0;
    TimestampMs boundary_ts = 0;
    TimestampMs length_ms = kDefaultWindowMs;
    WindowStats stats;
    std::vector<WindowRecordPtr> records;
  };
  std::shared_ptr<const State> state_ = std::make_shared<State>();
};

// Time-based sliding window over record bundles. An event belongs to the
// window iff now - length < ts <= now; events exactly `length` old are
// evicted. Evicted token counts stay in the prior-window table until they
// are more than two lengths old.
//
// Single writer. Snapshots may be read from any thread.
class SlidingWindow {
 public:
  explicit SlidingWindow(TimestampMs length_ms = kDefaultWindowMs);

  TimestampMs length_ms() const { return length_ms_; }
  // Latest timestamp seen, or nullopt before the first insert.
  std::optional<TimestampMs> now() const { return now_; }

  // Inserts a record bundle. A timestamp past `now` first advances the
  // window (evicting what expires); an older one is placed in order.
  // Throws StaleEvent when ts <= now - length.
  void insert(WindowRecordPtr bundle);
  void insert(RawRecord record, std::vector<AtomicEvent> events);
  void insert_event(const AtomicEvent& event);

  // Advances to `now` and evicts expired events. Earlier times are ignored.
  void evict_expired(TimestampMs now);

  WindowSnapshot snapshot(std::int64_t index) const;

  const WindowStats& stats() const { return stats_; }
  std::size_t record_count() const { return current_.size(); }
  std::size_t event_count() const { return event_count_; }
  const std::deque<WindowRecordPtr>& bundles() const { return current_; }

 private:
  void apply(const WindowRecord& bundle, std::int64_t sign);
  void apply_prior(const WindowRecord& bundle, std::int64_t sign);

  TimestampMs length_ms_;
  std::optional<TimestampMs> now_;
  std::deque<WindowRecordPtr> current_;
  std::deque<WindowRecordPtr> lagged_;
  WindowStats stats_;
  std::size_t event_count_ = 0;
};

// count(token) / largest count in the window; 0 for an absent token or an
// empty window.
double token_score(const WindowStats& stats, std::string_view token);

// (v + 1) / 2 for v = (now - prev) / (now + prev), v = 0 when both are zero.
double frequency_variation(const WindowStats& stats, std::string_view token);
double frequency_variation(std::int64_t count_now, std::int64_t count_prev);

// (x - lo) / (hi - lo) clamped to [0, 1]; 0.5 when hi == lo.
double scale_normalize(double x, double lo, double hi);

}  // namespace evfilter
