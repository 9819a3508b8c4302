#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace evfilter {

// Milliseconds since the Unix epoch.
using TimestampMs = std::int64_t;

inline constexpr std::size_t kMaxTextLength = 1000;

// One ingested tweet-like record.
struct RawRecord {
  std::string id;
  TimestampMs ts = 0;
  std::string text;
  std::int64_t followers = 0;
  std::int64_t friends = 0;
  std::int64_t statuses = 0;
  std::optional<std::string> lang;
  std::optional<std::string> retweet_of;

  bool operator==(const RawRecord&) const = default;
};

// Parses one JSON-lines record. Throws ParseError on malformed JSON and
// SchemaError when id/ts/text are missing or any field has the wrong type.
// Unknown fields (location, local time, ...) are ignored.
RawRecord parse_record(std::string_view line);

// Serializes a record to a single JSON line (no trailing newline). Absent
// optional fields are omitted.
std::string to_json_line(const RawRecord& record);

// English filter: `lang == "en"` when the field is present, otherwise the
// stopword heuristic below.
bool filter_language(const RawRecord& record);

// True when `text` has at least 2 embedded-stopword hits or at least 15% of
// its word tokens are stopwords. Empty text is never English.
bool looks_english(std::string_view text);

}  // namespace evfilter
