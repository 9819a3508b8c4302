#include "evfilter/features.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "evfilter/errors.hpp"
#include "evfilter/metrics.hpp"
#include "evfilter/random.hpp"
#include "evfilter/text.hpp"

namespace evfilter {

FeatureVector::FeatureVector(std::size_t size) : size_(size) {
  if (size == 0 || size > kMaxFeatureCount) throw Error("feature vector size out of range");
}

bool FeatureVector::operator==(const FeatureVector& other) const {
  return size_ == other.size_ && std::equal(values_.begin(), values_.begin() + static_cast<std::ptrdiff_t>(size_),
                                            other.values_.begin());
}

std::vector<ScoredToken> top_tokens(std::span<const AtomicEvent> events, const WindowStats& stats, std::size_t k) {
  std::vector<ScoredToken> tokens;
  for (const auto& e : events) {
    if (auto* t = std::get_if<TokenPayload>(&e.payload)) {
      if (std::none_of(tokens.begin(), tokens.end(), [&](const ScoredToken& s) { return s.token == t->token; })) {
        tokens.push_back({t->token, token_score(stats, t->token)});
      }
    }
  }
  std::sort(tokens.begin(), tokens.end(), [](const ScoredToken& a, const ScoredToken& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
  if (tokens.size() > k) tokens.resize(k);
  return tokens;
}

FeatureVector assemble_features(const RawRecord& record, std::span<const AtomicEvent> events,
                                const WindowStats& stats, const FeatureOptions& options) {
  FeatureVector f(options.dimension());
  for (const auto& e : events) {
    if (e.is<HashtagPayload>()) f[feature::kHashtag] = 1.0;
    if (e.is<LinkPayload>()) f[feature::kLink] = 1.0;
  }

  const auto top = top_tokens(events, stats, kTopTokens);
  for (std::size_t i = 0; i < kTopTokens; ++i) {
    if (i < top.size()) {
      f[feature::kTokenScore + i] = top[i].score;
      f[feature::kVariation + i] = frequency_variation(stats, top[i].token);
    } else {
      f[feature::kTokenScore + i] = 0.0;
      f[feature::kVariation + i] = 0.5;
    }
  }

  auto normalized = [](const MinMaxTracker& tracker, std::int64_t value) {
    if (tracker.empty()) return 0.5;
    return scale_normalize(static_cast<double>(value), static_cast<double>(tracker.lo()),
                           static_cast<double>(tracker.hi()));
  };
  f[feature::kFollowers] = normalized(stats.followers, record.followers);
  f[feature::kFriends] = normalized(stats.friends, record.friends);
  f[feature::kStatuses] = normalized(stats.statuses, record.statuses);
  if (options.include_text_length) {
    f[feature::kTextLength] = normalized(stats.text_length, static_cast<std::int64_t>(record.text.size()));
  }
  return f;
}

int label_by_retweet(const WindowRecord& bundle, const WindowStats& stats) {
  std::vector<std::string> tokens;
  const RetweetPayload* own_retweet = nullptr;
  for (const auto& e : bundle.events) {
    if (auto* t = std::get_if<TokenPayload>(&e.payload)) tokens.push_back(t->token);
    if (auto* r = std::get_if<RetweetPayload>(&e.payload)) own_retweet = r;
  }

  const std::string& id = bundle.record.id;
  if (auto it = stats.retweeted_ids.find(id); it != stats.retweeted_ids.end()) {
    std::int64_t count = it->second;
    if (own_retweet && own_retweet->original_id == id) --count;
    if (count > 0) return 1;
  }

  const std::string body = join_tokens(tokens);
  if (body.empty()) return 0;
  if (auto it = stats.retweet_bodies.find(body); it != stats.retweet_bodies.end()) {
    std::int64_t count = it->second;
    if (own_retweet && !own_retweet->original_id && own_retweet->normalized_body == body) --count;
    if (count > 0) return 1;
  }
  return 0;
}

std::vector<LabeledSample> oversample(std::span<const LabeledSample> samples, std::uint64_t seed) {
  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (samples[i].label == 1 ? positives : negatives).push_back(i);
  }
  if (positives.empty() || negatives.empty()) {
    throw DegenerateWindow("oversampling needs both classes (" + std::to_string(positives.size()) + " positive, " +
                           std::to_string(negatives.size()) + " negative)");
  }

  Rng rng(seed);
  std::vector<LabeledSample> out(samples.begin(), samples.end());
  const auto& minority = positives.size() < negatives.size() ? positives : negatives;
  const std::size_t target = std::max(positives.size(), negatives.size());
  out.reserve(2 * target);
  for (std::size_t n = minority.size(); n < target; ++n) {
    out.push_back(samples[minority[rng.uniform_index(minority.size())]]);
  }
  rng.shuffle(std::span<LabeledSample>(out));
  return out;
}

namespace {

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("bad number '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    cells.push_back(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return cells;
}

}  // namespace

void write_samples_csv(std::ostream& out, std::span<const LabeledSample> samples, bool header) {
  if (header) {
    const std::size_t dim = samples.empty() ? kFeatureCount : samples.front().features.size();
    for (std::size_t i = 0; i < dim; ++i) out << 'f' << i << ',';
    out << "label,record_id,window_index\n";
  }
  for (const auto& s : samples) {
    for (double v : s.features.values()) out << format_double(v) << ',';
    out << s.label << ',' << s.record_id << ',' << s.window_index << '\n';
  }
}

std::vector<LabeledSample> read_samples_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = split_csv(line);
  if (header.size() < 4) throw SchemaError("sample CSV header too short");
  const std::size_t dim = header.size() - 3;

  std::vector<LabeledSample> samples;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) throw SchemaError("sample CSV row has wrong column count");
    LabeledSample s{FeatureVector(dim), 0, {}, 0};
    for (std::size_t i = 0; i < dim; ++i) s.features[i] = parse_double(cells[i]);
    s.label = static_cast<int>(parse_double(cells[dim]));
    s.record_id = std::string(cells[dim + 1]);
    s.window_index = static_cast<std::int64_t>(parse_double(cells[dim + 2]));
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace evfilter
