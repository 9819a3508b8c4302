#include "evfilter/record.hpp"

#include <json.hpp>

#include "evfilter/errors.hpp"
#include "evfilter/text.hpp"

namespace evfilter {
namespace {

using nlohmann::json;

const json& required(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw SchemaError(std::string("missing required field '") + key + "'");
  return *it;
}

std::int64_t counter(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return 0;
  if (!it->is_number_integer()) throw SchemaError(std::string("field '") + key + "' must be an integer");
  const auto value = it->get<std::int64_t>();
  if (value < 0) throw SchemaError(std::string("field '") + key + "' must be non-negative");
  return value;
}

std::optional<std::string> optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw SchemaError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

}  // namespace

RawRecord parse_record(std::string_view line) {
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) throw ParseError("malformed JSON");
  if (!obj.is_object()) throw SchemaError("record must be a JSON object");

  RawRecord r;
  const auto& id = required(obj, "id");
  const auto& ts = required(obj, "ts");
  const auto& text = required(obj, "text");
  if (!id.is_string()) throw SchemaError("field 'id' must be a string");
  if (!ts.is_number_integer()) throw SchemaError("field 'ts' must be an integer");
  if (!text.is_string()) throw SchemaError("field 'text' must be a string");

  r.id = id.get<std::string>();
  r.ts = ts.get<TimestampMs>();
  r.text = text.get<std::string>();
  if (utf8_length(r.text) > kMaxTextLength) throw SchemaError("field 'text' exceeds 1000 characters");
  r.followers = counter(obj, "followers");
  r.friends = counter(obj, "friends");
  r.statuses = counter(obj, "statuses");
  r.lang = optional_string(obj, "lang");
  r.retweet_of = optional_string(obj, "retweet_of");
  return r;
}

std::string to_json_line(const RawRecord& record) {
  // ordered_json keeps the field order stable for byte-identical output.
  nlohmann::ordered_json obj;
  obj["id"] = record.id;
  obj["ts"] = record.ts;
  obj["text"] = record.text;
  obj["followers"] = record.followers;
  obj["friends"] = record.friends;
  obj["statuses"] = record.statuses;
  if (record.lang) obj["lang"] = *record.lang;
  if (record.retweet_of) obj["retweet_of"] = *record.retweet_of;
  return obj.dump();
}

bool looks_english(std::string_view text) {
  const auto words = split_words(text);
  if (words.empty()) return false;
  std::size_t hits = 0;
  for (const auto& w : words) {
    if (is_stopword(w)) ++hits;
  }
  return hits >= 2 || static_cast<double>(hits) >= 0.15 * static_cast<double>(words.size());
}

bool filter_language(const RawRecord& record) {
  if (record.lang) return *record.lang == "en";
  return looks_english(record.text);
}

}  // namespace evfilter
