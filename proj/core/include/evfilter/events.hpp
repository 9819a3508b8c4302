#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evfilter/record.hpp"

namespace evfilter {

// Header shared by every atomic information event. All events derived from
// one record inherit its timestamp.
struct EventHeader {
  std::string event_id;
  TimestampMs ts = 0;
  TimestampMs granularity_ms = 1;
  std::string source_record_id;

  bool operator==(const EventHeader&) const = default;
};

struct TokenPayload {
  std::string token;
  bool operator==(const TokenPayload&) const = default;
};

struct LinkPayload {
  std::string url;
  bool operator==(const LinkPayload&) const = default;
};

struct HashtagPayload {
  std::string tag;
  bool operator==(const HashtagPayload&) const = default;
};

struct MentionPayload {
  std::string handle;
  bool operator==(const MentionPayload&) const = default;
};

struct RetweetPayload {
  std::optional<std::string> original_id;
  std::string normalized_body;
  bool operator==(const RetweetPayload&) const = default;
};

// token_a < token_b.
struct CooccurrencePayload {
  std::string token_a;
  std::string token_b;
  bool operator==(const CooccurrencePayload&) const = default;
};

struct MetadataPayload {
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  std::int64_t statuses = 0;
  bool operator==(const MetadataPayload&) const = default;
};

using EventPayload = std::variant<TokenPayload, LinkPayload, HashtagPayload, MentionPayload, RetweetPayload,
                                  CooccurrencePayload, MetadataPayload>;

struct AtomicEvent {
  EventHeader header;
  EventPayload payload;

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(payload);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(payload);
  }

  bool operator==(const AtomicEvent&) const = default;
};

// Name used in the event log's "type" field.
std::string_view event_type_name(const AtomicEvent& event);

// One pair per unordered pair of distinct token types, members and pairs in
// lexicographic order.
std::vector<CooccurrencePayload> build_cooccurrences(std::span<const std::string> tokens);

// Decomposes a record into atomic events: one token event per normalized
// token occurrence, one link/hashtag/mention event per match, one retweet
// event when the text has the RT prefix or `retweet_of` is set, the
// cooccurrence events, and exactly one metadata event.
//
// Event ids are "<record id>/<ordinal>", unique as long as record ids are.
std::vector<AtomicEvent> map_record(const RawRecord& record);

// Event-log line (JSON, no trailing newline) and its inverse. parse_event
// throws ParseError/SchemaError like parse_record.
std::string to_json_line(const AtomicEvent& event);
AtomicEvent parse_event(std::string_view line);

}  // namespace evfilter
