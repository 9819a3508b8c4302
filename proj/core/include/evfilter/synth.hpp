#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "evfilter/features.hpp"
#include "evfilter/record.hpp"

namespace evfilter {

// Generator for desk-scale test streams. Records draw tokens from a Zipf
// vocabulary; a record that has a hashtag, a link and the bursty token
// ("planted" records) is retweeted with probability p_hi, every other
// record with p_lo, after a uniform delay.
struct SynthConfig {
  double rate = 100.0;           // original records per second
  double duration_secs = 600.0;  // originals are generated in [start, start + duration)
  std::size_t vocab_size = 5000;
  double zipf_s = 1.0;
  std::size_t min_tokens = 2;
  std::size_t max_tokens = 6;
  double hashtag_prob = 0.35;
  double link_prob = 0.35;
  double mention_prob = 0.2;
  double bursty_prob = 0.6;
  std::string bursty_token = "quokkafest";
  double p_hi = 0.6;
  double p_lo = 0.01;
  double min_delay_secs = 5.0;
  double max_delay_secs = 110.0;
  double non_english_prob = 0.01;  // records tagged lang=de, dropped by the language filter
  TimestampMs start_ts = 1330671600000;
  std::uint64_t seed = 1;

  void validate() const;
};

// The plant predicate on a record's text: hashtag AND link AND bursty token.
bool satisfies_plant(const RawRecord& record, const SynthConfig& config);

// Records in timestamp order; deterministic per config.
std::vector<RawRecord> generate_synthetic_records(const SynthConfig& config);

// JSON-lines stream of generate_synthetic_records.
void generate_synthetic_stream(const SynthConfig& config, std::ostream& out);

// n vectors with i.i.d. uniform [0, 1) components; deterministic per seed.
std::vector<FeatureVector> random_baseline_features(std::size_t n, std::size_t dim, std::uint64_t seed);

}  // namespace evfilter
