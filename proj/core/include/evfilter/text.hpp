#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace evfilter {

// Microtext markup found in one record.
struct Semantics {
  bool is_retweet = false;
  std::vector<std::string> mentions;  // lowercase, '@' stripped
  std::vector<std::string> hashtags;  // lowercase, '#' stripped
  std::vector<std::string> links;     // verbatim

  bool operator==(const Semantics&) const = default;
};

// Applies the markup patterns
//   hashtag  #([A-Za-z0-9_]+)
//   mention  @([A-Za-z0-9_]+)
//   url      https?://[^\s]+
//   retweet  ^[Rr][Tt]\s+@
// with leftmost, non-overlapping, greedy matching. Hashtags and mentions are
// searched after URL matches are blanked out, so a URL fragment never yields
// a tag. Duplicates are preserved in text order.
Semantics extract_semantics(std::string_view text);

// Blanks the retweet prefix, URLs, mentions and hashtags (whole markup, not
// only the marker character).
std::string strip_markup(std::string_view text);

// Lowercased ASCII alphanumeric runs. Every other byte, including non-ASCII
// UTF-8 bytes, separates words.
std::vector<std::string> split_words(std::string_view text);

// strip_markup -> lowercase -> split -> drop length < 2 -> drop stopwords ->
// Porter stem. Order and duplicates are preserved.
std::vector<std::string> tokenize_normalize(std::string_view text);

// Space-joined token sequence; used as the retweet body key.
std::string join_tokens(std::span<const std::string> tokens);

bool is_stopword(std::string_view word);

// The embedded English stopword list, sorted.
std::span<const std::string_view> stopwords();

// Porter suffix stemmer (the reference implementation's rules). Expects a
// lowercase word; words of length <= 2 are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace evfilter
