#include "evfilter/replay.hpp"

#include <spdlog/spdlog.h>

#include <fstream>
#include <thread>

#include "evfilter/errors.hpp"

namespace evfilter {

using SteadyClock = std::chrono::steady_clock;

void StreamClock::observe(TimestampMs record_ts) {
  if (mode_ == ClockMode::kData) {
    if (!data_now_ || record_ts > *data_now_) data_now_ = record_ts;
    return;
  }
  if (!wall_anchor_) {
    wall_anchor_ = SteadyClock::now();
    data_now_ = record_ts;
  }
}

TimestampMs StreamClock::now() const {
  TimestampMs t = data_now_.value_or(0);
  if (mode_ == ClockMode::kWall && wall_anchor_) {
    t += std::chrono::duration_cast<std::chrono::milliseconds>(SteadyClock::now() - *wall_anchor_).count();
  }
  last_ = std::max(last_, t);
  return last_;
}

bool ReorderBuffer::push(RawRecord record) {
  if (max_seen_ && record.ts < *max_seen_ - max_skew_ms_) return false;
  if (!max_seen_ || record.ts > *max_seen_) max_seen_ = record.ts;
  heap_.push({std::move(record), seq_++});
  return true;
}

std::vector<RawRecord> ReorderBuffer::release() {
  std::vector<RawRecord> out;
  if (!max_seen_) return out;
  const TimestampMs horizon = *max_seen_ - max_skew_ms_;
  while (!heap_.empty() && heap_.top().record.ts <= horizon) {
    out.push_back(std::move(const_cast<Entry&>(heap_.top()).record));
    heap_.pop();
  }
  return out;
}

std::vector<RawRecord> ReorderBuffer::flush() {
  std::vector<RawRecord> out;
  while (!heap_.empty()) {
    out.push_back(std::move(const_cast<Entry&>(heap_.top()).record));
    heap_.pop();
  }
  return out;
}

Replayer::Replayer(ReplayConfig config) : config_(config), clock_(config.clock) {
  if (!(config_.rate > 0)) throw Error("replay rate must be positive");
}

bool Replayer::emit(RawRecord&& record, const Sink& sink) {
  if (config_.clock == ClockMode::kWall) {
    const auto due = start_ + std::chrono::duration_cast<SteadyClock::duration>(
                                  std::chrono::duration<double>(static_cast<double>(stats_.emitted) / config_.rate));
    std::this_thread::sleep_until(due);
  }
  clock_.observe(record.ts);
  ++stats_.emitted;
  return sink(std::move(record));
}

ReplayStats Replayer::run(std::istream& in, const Sink& sink, const std::atomic<bool>* stop) {
  stats_ = {};
  start_ = SteadyClock::now();
  ReorderBuffer buffer(config_.max_skew_ms);
  bool open = true;
  std::string line;

  auto stopped = [&] { return stop && stop->load(std::memory_order_relaxed); };

  while (open && !stopped() && std::getline(in, line)) {
    ++stats_.lines;
    if (line.empty()) continue;
    RawRecord record;
    try {
      record = parse_record(line);
    } catch (const Error& e) {
      ++stats_.parse_errors;
      spdlog::warn("line {}: {}", stats_.lines, e.what());
      continue;
    }
    if (!filter_language(record)) {
      ++stats_.language_filtered;
      continue;
    }
    if (!seen_ids_.insert(record.id).second) {
      ++stats_.duplicate_ids;
      spdlog::warn("line {}: duplicate record id '{}' dropped", stats_.lines, record.id);
      continue;
    }
    const TimestampMs ts = record.ts;
    if (!buffer.push(std::move(record))) {
      ++stats_.out_of_order_dropped;
      spdlog::warn("line {}: timestamp {} beyond the {} ms reorder tolerance, dropped", stats_.lines, ts,
                   config_.max_skew_ms);
      continue;
    }
    for (auto& r : buffer.release()) {
      if (open) open = emit(std::move(r), sink);
    }
  }
  if (!stopped()) {
    for (auto& r : buffer.flush()) {
      if (open) open = emit(std::move(r), sink);
    }
  }
  stats_.elapsed_seconds = std::chrono::duration<double>(SteadyClock::now() - start_).count();
  return stats_;
}

ReplayStats Replayer::run_file(const std::string& path, const Sink& sink, const std::atomic<bool>* stop) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input '" + path + "'");
  return run(in, sink, stop);
}

}  // namespace evfilter
