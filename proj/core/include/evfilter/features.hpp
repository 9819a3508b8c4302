#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "evfilter/events.hpp"
#include "evfilter/window.hpp"

namespace evfilter {

inline constexpr std::size_t kFeatureCount = 15;
inline constexpr std::size_t kMaxFeatureCount = 16;
inline constexpr std::size_t kTopTokens = 5;

// Feature layout, version 1:
//   [0]      hashtag indicator
//   [1]      link indicator
//   [2..6]   token_score of the record's top-5 tokens, descending (0-padded)
//   [7..11]  frequency_variation of the same tokens (0.5-padded)
//   [12..14] scale-normalized followers, friends, statuses
//   [15]     scale-normalized text length (only with include_text_length)
inline constexpr int kFeatureLayoutVersion = 1;
namespace feature {
inline constexpr std::size_t kHashtag = 0;
inline constexpr std::size_t kLink = 1;
inline constexpr std::size_t kTokenScore = 2;
inline constexpr std::size_t kVariation = 7;
inline constexpr std::size_t kFollowers = 12;
inline constexpr std::size_t kFriends = 13;
inline constexpr std::size_t kStatuses = 14;
inline constexpr std::size_t kTextLength = 15;
}  // namespace feature

class FeatureVector {
 public:
  explicit FeatureVector(std::size_t size = kFeatureCount);

  std::size_t size() const { return size_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return {values_.data(), size_}; }
  std::span<double> values() { return {values_.data(), size_}; }

  bool operator==(const FeatureVector& other) const;

 private:
  std::array<double, kMaxFeatureCount> values_{};
  std::size_t size_;
};

struct FeatureOptions {
  bool include_text_length = false;

  std::size_t dimension() const { return include_text_length ? kMaxFeatureCount : kFeatureCount; }
};

struct ScoredToken {
  std::string token;
  double score = 0.0;
};

// The record's k distinct tokens with the highest token_score, ties broken
// lexicographically.
std::vector<ScoredToken> top_tokens(std::span<const AtomicEvent> events, const WindowStats& stats,
                                    std::size_t k = kTopTokens);

FeatureVector assemble_features(const RawRecord& record, std::span<const AtomicEvent> events,
                                const WindowStats& stats, const FeatureOptions& options = {});

inline FeatureVector assemble_features(const WindowRecord& bundle, const WindowStats& stats,
                                       const FeatureOptions& options = {}) {
  return assemble_features(bundle.record, bundle.events, stats, options);
}

struct LabeledSample {
  FeatureVector features;
  int label = 0;  // 1 = relevant, 0 = irrelevant
  std::string record_id;
  std::int64_t window_index = 0;

  bool operator==(const LabeledSample&) const = default;
};

// 1 iff the window holds a retweet event whose original id is this record's
// id, or, for retweets without an original id, whose body equals the
// record's normalized token sequence (the record's own retweet event never
// counts).
int label_by_retweet(const WindowRecord& bundle, const WindowStats& stats);

// Duplicates minority-class samples, drawn uniformly with replacement, until
// both classes have equal counts, then shuffles. Every input sample is kept.
// Throws DegenerateWindow when either class is empty.
std::vector<LabeledSample> oversample(std::span<const LabeledSample> samples, std::uint64_t seed);

// CSV with one column per feature, then label, record_id, window_index.
// Values are written in shortest round-trip form.
// Header first unless `header` is false (appending further windows).
void write_samples_csv(std::ostream& out, std::span<const LabeledSample> samples, bool header = true);
std::vector<LabeledSample> read_samples_csv(std::istream& in);

}  // namespace evfilter
