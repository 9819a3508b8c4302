#include "evfilter/events.hpp"

#include <algorithm>
#include <json.hpp>

#include "evfilter/errors.hpp"
#include "evfilter/text.hpp"

namespace evfilter {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::string_view event_type_name(const AtomicEvent& event) {
  return std::visit(overloaded{
                        [](const TokenPayload&) { return std::string_view("token"); },
                        [](const LinkPayload&) { return std::string_view("link"); },
                        [](const HashtagPayload&) { return std::string_view("hashtag"); },
                        [](const MentionPayload&) { return std::string_view("mention"); },
                        [](const RetweetPayload&) { return std::string_view("retweet"); },
                        [](const CooccurrencePayload&) { return std::string_view("cooccurrence"); },
                        [](const MetadataPayload&) { return std::string_view("metadata"); },
                    },
                    event.payload);
}

std::vector<CooccurrencePayload> build_cooccurrences(std::span<const std::string> tokens) {
  std::vector<std::string> distinct(tokens.begin(), tokens.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  std::vector<CooccurrencePayload> pairs;
  if (distinct.size() < 2) return pairs;
  pairs.reserve(distinct.size() * (distinct.size() - 1) / 2);
  for (std::size_t i = 0; i < distinct.size(); ++i) {
    for (std::size_t j = i + 1; j < distinct.size(); ++j) pairs.push_back({distinct[i], distinct[j]});
  }
  return pairs;
}

std::vector<AtomicEvent> map_record(const RawRecord& record) {
  const auto semantics = extract_semantics(record.text);
  const auto tokens = tokenize_normalize(record.text);
  const auto pairs = build_cooccurrences(tokens);

  std::vector<AtomicEvent> events;
  events.reserve(tokens.size() + semantics.links.size() + semantics.hashtags.size() +
                 semantics.mentions.size() + pairs.size() + 2);

  auto emit = [&](EventPayload payload) {
    EventHeader header{record.id + "/" + std::to_string(events.size()), record.ts, 1, record.id};
    events.push_back({std::move(header), std::move(payload)});
  };

  for (const auto& t : tokens) emit(TokenPayload{t});
  for (const auto& l : semantics.links) emit(LinkPayload{l});
  for (const auto& h : semantics.hashtags) emit(HashtagPayload{h});
  for (const auto& m : semantics.mentions) emit(MentionPayload{m});
  if (semantics.is_retweet || record.retweet_of) emit(RetweetPayload{record.retweet_of, join_tokens(tokens)});
  for (const auto& p : pairs) emit(p);
  emit(MetadataPayload{record.followers, record.friends, record.statuses});
  return events;
}

std::string to_json_line(const AtomicEvent& event) {
  nlohmann::ordered_json obj;
  obj["event_id"] = event.header.event_id;
  obj["ts"] = event.header.ts;
  obj["granularity_ms"] = event.header.granularity_ms;
  obj["source"] = event.header.source_record_id;
  obj["type"] = event_type_name(event);
  std::visit(overloaded{
                 [&](const TokenPayload& p) { obj["token"] = p.token; },
                 [&](const LinkPayload& p) { obj["url"] = p.url; },
                 [&](const HashtagPayload& p) { obj["tag"] = p.tag; },
                 [&](const MentionPayload& p) { obj["handle"] = p.handle; },
                 [&](const RetweetPayload& p) {
                   if (p.original_id) obj["original_id"] = *p.original_id;
                   obj["normalized_body"] = p.normalized_body;
                 },
                 [&](const CooccurrencePayload& p) {
                   obj["token_a"] = p.token_a;
                   obj["token_b"] = p.token_b;
                 },
                 [&](const MetadataPayload& p) {
                   obj["followers"] = p.followers;
                   obj["friends"] = p.friends;
                   obj["statuses"] = p.statuses;
                 },
             },
             event.payload);
  return obj.dump();
}

AtomicEvent parse_event(std::string_view line) {
  using nlohmann::json;
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (obj.is_discarded()) throw ParseError("malformed JSON");
  if (!obj.is_object()) throw SchemaError("event must be a JSON object");
  try {
    AtomicEvent e;
    e.header.event_id = obj.at("event_id").get<std::string>();
    e.header.ts = obj.at("ts").get<TimestampMs>();
    e.header.granularity_ms = obj.value("granularity_ms", TimestampMs{1});
    e.header.source_record_id = obj.at("source").get<std::string>();
    const auto type = obj.at("type").get<std::string>();
    if (type == "token") {
      e.payload = TokenPayload{obj.at("token").get<std::string>()};
    } else if (type == "link") {
      e.payload = LinkPayload{obj.at("url").get<std::string>()};
    } else if (type == "hashtag") {
      e.payload = HashtagPayload{obj.at("tag").get<std::string>()};
    } else if (type == "mention") {
      e.payload = MentionPayload{obj.at("handle").get<std::string>()};
    } else if (type == "retweet") {
      RetweetPayload p;
      if (obj.contains("original_id")) p.original_id = obj.at("original_id").get<std::string>();
      p.normalized_body = obj.at("normalized_body").get<std::string>();
      e.payload = std::move(p);
    } else if (type == "cooccurrence") {
      e.payload = CooccurrencePayload{obj.at("token_a").get<std::string>(), obj.at("token_b").get<std::string>()};
    } else if (type == "metadata") {
      e.payload = MetadataPayload{obj.at("followers").get<std::int64_t>(), obj.at("friends").get<std::int64_t>(),
                                  obj.at("statuses").get<std::int64_t>()};
    } else {
      throw SchemaError("unknown event type '" + type + "'");
    }
    return e;
  } catch (const json::exception& ex) {
    throw SchemaError(ex.what());
  }
}

}  // namespace evfilter
