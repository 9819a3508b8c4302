#pragma once

#include <string>
#include <vector>

#include "evfilter/events.hpp"
#include "evfilter/record.hpp"
#include "evfilter/window.hpp"

namespace evfilter::test {

inline RawRecord make_record(std::string id, TimestampMs ts, std::string text, std::int64_t followers = 0,
                             std::int64_t friends = 0, std::int64_t statuses = 0) {
  RawRecord r;
  r.id = std::move(id);
  r.ts = ts;
  r.text = std::move(text);
  r.followers = followers;
  r.friends = friends;
  r.statuses = statuses;
  r.lang = "en";
  return r;
}

inline WindowRecordPtr make_bundle(RawRecord r) {
  auto events = map_record(r);
  return std::make_shared<const WindowRecord>(WindowRecord{std::move(r), std::move(events), false});
}

// A bundle with exactly the given token events and nothing else.
inline WindowRecordPtr token_bundle(const std::string& id, TimestampMs ts, const std::vector<std::string>& tokens) {
  WindowRecord b;
  b.record.id = id;
  b.record.ts = ts;
  std::size_t ordinal = 0;
  for (const auto& t : tokens) {
    b.events.push_back(AtomicEvent{{id + "/" + std::to_string(ordinal++), ts, 1, id}, TokenPayload{t}});
  }
  return std::make_shared<const WindowRecord>(std::move(b));
}

}  // namespace evfilter::test
