#include "evfilter/synth.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>

#include "evfilter/errors.hpp"
#include "evfilter/random.hpp"
#include "evfilter/text.hpp"

namespace evfilter {
namespace {

constexpr std::string_view kConsonants = "bdfgklmnprtvz";
constexpr std::string_view kVowels = "aiou";
constexpr std::string_view kFiller[] = {"the", "and", "is", "of", "to", "in", "for", "this", "with", "on"};
constexpr std::string_view kForeign[] = {"und", "der", "die", "nicht", "mit", "auf", "ein", "ist"};
constexpr std::string_view kLinkAlphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

// Distinct pronounceable word per index: at least two consonant-vowel
// syllables, mixed-radix encoding of the index.
std::string vocab_word(std::size_t index) {
  const std::size_t radix = kConsonants.size() * kVowels.size();
  std::string word;
  std::size_t n = index;
  std::size_t syllables = 0;
  do {
    const std::size_t digit = n % radix;
    word += kConsonants[digit / kVowels.size()];
    word += kVowels[digit % kVowels.size()];
    n /= radix;
    ++syllables;
  } while (n > 0 || syllables < 2);
  return word;
}

class ZipfSampler {
 public:
  ZipfSampler(std::size_t n, double s) : cdf_(n) {
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      total += 1.0 / std::pow(static_cast<double>(k + 1), s);
      cdf_[k] = total;
    }
    for (double& c : cdf_) c /= total;
  }

  std::size_t sample(Rng& rng) const {
    const double u = rng.uniform01();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

// log-uniform integer in [1, hi].
std::int64_t log_uniform(Rng& rng, double hi) {
  return static_cast<std::int64_t>(std::floor(std::exp(rng.uniform(0.0, std::log(hi)))));
}

struct PendingRetweet {
  TimestampMs ts;
  std::uint64_t order;  // tie-break: scheduling order
  std::string original_id;
  std::string original_text;

  bool operator>(const PendingRetweet& o) const { return ts != o.ts ? ts > o.ts : order > o.order; }
};

}  // namespace

void SynthConfig::validate() const {
  if (!(rate > 0)) throw Error("synthetic rate must be positive");
  if (!(duration_secs > 0)) throw Error("synthetic duration must be positive");
  if (vocab_size == 0) throw Error("vocabulary must be non-empty");
  if (min_tokens > max_tokens) throw Error("min_tokens exceeds max_tokens");
  if (min_delay_secs < 0 || max_delay_secs < min_delay_secs) throw Error("bad retweet delay range");
  for (double p : {hashtag_prob, link_prob, mention_prob, bursty_prob, p_hi, p_lo, non_english_prob}) {
    if (p < 0 || p > 1) throw Error("probabilities must lie in [0, 1]");
  }
}

bool satisfies_plant(const RawRecord& record, const SynthConfig& config) {
  const auto semantics = extract_semantics(record.text);
  if (semantics.hashtags.empty() || semantics.links.empty()) return false;
  const auto words = split_words(strip_markup(record.text));
  return std::find(words.begin(), words.end(), config.bursty_token) != words.end();
}

std::vector<RawRecord> generate_synthetic_records(const SynthConfig& config) {
  config.validate();
  Rng rng(config.seed);
  const ZipfSampler vocab(config.vocab_size, config.zipf_s);
  const ZipfSampler tags(50, 1.0);

  std::vector<RawRecord> out;
  std::priority_queue<PendingRetweet, std::vector<PendingRetweet>, std::greater<>> pending;
  std::uint64_t next_id = 1000000;
  std::uint64_t scheduled = 0;
  const auto end_ts = config.start_ts + static_cast<TimestampMs>(config.duration_secs * 1000.0);
  const double mean_gap_ms = 1000.0 / config.rate;

  auto author = [&](RawRecord& r) {
    r.followers = log_uniform(rng, 1e6);
    r.friends = log_uniform(rng, 1e5);
    r.statuses = log_uniform(rng, 1e6);
  };

  auto flush_until = [&](TimestampMs ts) {
    while (!pending.empty() && pending.top().ts <= ts) {
      const auto rt = pending.top();
      pending.pop();
      RawRecord r;
      r.id = std::to_string(next_id++);
      r.ts = rt.ts;
      r.text = "RT @u" + std::to_string(rng.uniform_index(100000)) + ": " + rt.original_text;
      author(r);
      r.lang = "en";
      r.retweet_of = rt.original_id;
      out.push_back(std::move(r));
    }
  };

  double clock = static_cast<double>(config.start_ts);
  while (true) {
    clock += -std::log(1.0 - rng.uniform01()) * mean_gap_ms;
    const auto ts = static_cast<TimestampMs>(clock);
    if (ts >= end_ts) break;
    flush_until(ts);

    RawRecord r;
    r.id = std::to_string(next_id++);
    r.ts = ts;
    author(r);

    std::vector<std::string> words;
    if (rng.bernoulli(config.non_english_prob)) {
      r.lang = "de";
      for (int i = 0; i < 5; ++i) words.emplace_back(kForeign[rng.uniform_index(std::size(kForeign))]);
    } else {
      r.lang = "en";
      const std::size_t n_tokens =
          config.min_tokens + rng.uniform_index(config.max_tokens - config.min_tokens + 1);
      for (std::size_t i = 0; i < n_tokens; ++i) {
        words.push_back(vocab_word(vocab.sample(rng)));
        if (rng.bernoulli(0.3)) words.emplace_back(kFiller[rng.uniform_index(std::size(kFiller))]);
      }
      if (rng.bernoulli(config.bursty_prob)) {
        words.insert(words.begin() + static_cast<std::ptrdiff_t>(rng.uniform_index(words.size() + 1)),
                     config.bursty_token);
      }
      if (rng.bernoulli(config.mention_prob)) words.insert(words.begin(), "@u" + std::to_string(rng.uniform_index(100000)));
      if (rng.bernoulli(config.hashtag_prob)) words.push_back("#tag" + std::to_string(tags.sample(rng)));
      if (rng.bernoulli(config.link_prob)) {
        std::string link = "http://t.co/";
        for (int i = 0; i < 8; ++i) link += kLinkAlphabet[rng.uniform_index(kLinkAlphabet.size())];
        words.push_back(std::move(link));
      }
    }
    for (const auto& w : words) {
      if (!r.text.empty()) r.text += ' ';
      r.text += w;
    }

    if (r.lang == "en") {
      const double p = satisfies_plant(r, config) ? config.p_hi : config.p_lo;
      if (rng.bernoulli(p)) {
        const double delay = rng.uniform(config.min_delay_secs, config.max_delay_secs);
        const auto rt_ts = ts + static_cast<TimestampMs>(delay * 1000.0);
        if (rt_ts < end_ts) pending.push({rt_ts, scheduled++, r.id, r.text});
      }
    }
    out.push_back(std::move(r));
  }
  flush_until(end_ts);
  return out;
}

void generate_synthetic_stream(const SynthConfig& config, std::ostream& out) {
  for (const auto& r : generate_synthetic_records(config)) out << to_json_line(r) << '\n';
}

std::vector<FeatureVector> random_baseline_features(std::size_t n, std::size_t dim, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<FeatureVector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    FeatureVector f(dim);
    for (double& v : f.values()) v = rng.uniform01();
    out.push_back(f);
  }
  return out;
}

}  // namespace evfilter
