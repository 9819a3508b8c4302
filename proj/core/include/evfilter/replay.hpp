#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <queue>
#include <string>
#include <unordered_set>
#include <vector>

#include "evfilter/record.hpp"

namespace evfilter {

enum class ClockMode { kWall, kData };

// Monotonic stream time. In data mode it follows record timestamps; in wall
// mode it is anchored at the first observed record and then advances with
// the steady clock.
class StreamClock {
 public:
  explicit StreamClock(ClockMode mode) : mode_(mode) {}

  ClockMode mode() const { return mode_; }
  void observe(TimestampMs record_ts);
  // Start of stream time (0) until the first observe().
  TimestampMs now() const;

 private:
  ClockMode mode_;
  std::optional<TimestampMs> data_now_;
  std::optional<std::chrono::steady_clock::time_point> wall_anchor_;
  mutable TimestampMs last_ = 0;
};

// Restores timestamp order for records arriving up to `max_skew_ms` late.
// Records older than (latest seen - max_skew_ms) cannot be placed anymore
// and are rejected.
class ReorderBuffer {
 public:
  explicit ReorderBuffer(TimestampMs max_skew_ms) : max_skew_ms_(max_skew_ms) {}

  // False when the record is beyond the tolerance (caller drops it).
  bool push(RawRecord record);
  // Records that can no longer be preceded by an acceptable late arrival.
  std::vector<RawRecord> release();
  std::vector<RawRecord> flush();
  std::size_t size() const { return heap_.size(); }

 private:
  struct Entry {
    RawRecord record;
    std::uint64_t seq;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      return a.record.ts != b.record.ts ? a.record.ts > b.record.ts : a.seq > b.seq;
    }
  };
  TimestampMs max_skew_ms_;
  std::optional<TimestampMs> max_seen_;
  std::uint64_t seq_ = 0;
  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
};

struct ReplayConfig {
  double rate = 100.0;  // records per second, wall-clock mode only
  ClockMode clock = ClockMode::kData;
  TimestampMs max_skew_ms = 5000;
};

struct ReplayStats {
  std::size_t lines = 0;
  std::size_t emitted = 0;
  std::size_t parse_errors = 0;
  std::size_t language_filtered = 0;
  std::size_t duplicate_ids = 0;
  std::size_t out_of_order_dropped = 0;
  double elapsed_seconds = 0.0;

  // Records lost for reasons other than filtering: out-of-order beyond
  // tolerance and duplicate ids.
  std::size_t dropped() const { return out_of_order_dropped + duplicate_ids; }
};

// Parses, language-filters, reorders and paces a JSON-lines stream. Emission
// order equals input order for timestamp-sorted input. In wall-clock mode
// record k is released no earlier than start + k / rate.
class Replayer {
 public:
  // Returning false from the sink stops the replay.
  using Sink = std::function<bool(RawRecord&&)>;

  explicit Replayer(ReplayConfig config);

  ReplayStats run(std::istream& in, const Sink& sink, const std::atomic<bool>* stop = nullptr);
  // Throws IoError when the file cannot be opened.
  ReplayStats run_file(const std::string& path, const Sink& sink, const std::atomic<bool>* stop = nullptr);

  const StreamClock& clock() const { return clock_; }

 private:
  bool emit(RawRecord&& record, const Sink& sink);

  ReplayConfig config_;
  StreamClock clock_;
  std::unordered_set<std::string> seen_ids_;
  std::chrono::steady_clock::time_point start_;
  ReplayStats stats_;
};

}  // namespace evfilter
