#include "evfilter/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace evfilter {
namespace {

// Common English function words, plus "rt", "via" and "amp" (HTML-escaped
// ampersand), which are noise in microtext. Contraction fragments ("don",
// "ll", "ve", ...) are listed because tokenization splits on apostrophes.
// Must stay sorted.
constexpr auto kStopwords = std::to_array<std::string_view>({
    "a", "about", "above", "after", "again", "against", "ain", "all", "also", "am", "amp",
    "an", "and", "any", "are", "aren", "as", "at", "be", "because", "been", "before",
    "being", "below", "between", "both", "but", "by", "can", "could", "couldn", "d",
    "did", "didn", "do", "does", "doesn", "doing", "don", "down", "during", "each", "few",
    "for", "from", "further", "had", "hadn", "has", "hasn", "have", "haven", "having",
    "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i", "if",
    "in", "into", "is", "isn", "it", "its", "itself", "just", "let", "ll", "m", "ma",
    "me", "might", "mightn", "more", "most", "must", "mustn", "my", "myself", "needn",
    "no", "nor", "not", "now", "o", "of", "off", "on", "once", "only", "or", "other",
    "our", "ours", "ourselves", "out", "over", "own", "re", "rt", "s", "same", "shall",
    "shan", "she", "should", "shouldn", "so", "some", "such", "t", "than", "that", "the",
    "their", "theirs", "them", "themselves", "then", "there", "these", "they", "this",
    "those", "through", "to", "too", "under", "until", "up", "us", "ve", "very", "via",
    "was", "wasn", "we", "were", "weren", "what", "when", "where", "which", "while",
    "who", "whom", "why", "will", "with", "won", "would", "wouldn", "y", "yet", "you",
    "your", "yours", "yourself", "yourselves",
});

bool is_word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && (std::isalnum(u) || c == '_');
}

bool is_ascii_alnum(char c) {
  const auto u = static_cast<unsigned char>(c);
  return u < 0x80 && std::isalnum(u);
}

// Whitespace as matched by \s in the default regex traits.
bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (static_cast<unsigned char>(c) < 0x80) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

struct Span {
  std::size_t begin;
  std::size_t end;
};

// Length of an `https?://` scheme starting at pos, or 0.
std::size_t url_scheme_length(std::string_view text, std::size_t pos) {
  if (text.compare(pos, 7, "http://") == 0) return 7;
  if (text.compare(pos, 8, "https://") == 0) return 8;
  return 0;
}

std::vector<Span> find_urls(std::string_view text) {
  std::vector<Span> spans;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t scheme = url_scheme_length(text, pos);
    // [^\s]+ needs at least one character after the scheme.
    if (scheme == 0 || pos + scheme >= text.size() || is_space(text[pos + scheme])) {
      ++pos;
      continue;
    }
    std::size_t end = pos + scheme;
    while (end < text.size() && !is_space(text[end])) ++end;
    spans.push_back({pos, end});
    pos = end;
  }
  return spans;
}

// Matches of `<marker>([A-Za-z0-9_]+)`; spans cover the marker.
std::vector<Span> find_marked(std::string_view text, char marker) {
  std::vector<Span> spans;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text[pos] != marker || pos + 1 >= text.size() || !is_word_char(text[pos + 1])) {
      ++pos;
      continue;
    }
    std::size_t end = pos + 1;
    while (end < text.size() && is_word_char(text[end])) ++end;
    spans.push_back({pos, end});
    pos = end;
  }
  return spans;
}

// Length of `^[Rr][Tt]\s+` when followed by '@', else 0.
std::size_t retweet_prefix_length(std::string_view text) {
  if (text.size() < 4) return 0;
  if ((text[0] != 'R' && text[0] != 'r') || (text[1] != 'T' && text[1] != 't')) return 0;
  std::size_t end = 2;
  while (end < text.size() && is_space(text[end])) ++end;
  if (end == 2 || end >= text.size() || text[end] != '@') return 0;
  return end;
}

void blank(std::string& text, const std::vector<Span>& spans) {
  for (const auto& s : spans) std::fill(text.begin() + static_cast<std::ptrdiff_t>(s.begin),
                                        text.begin() + static_cast<std::ptrdiff_t>(s.end), ' ');
}

}  // namespace

Semantics extract_semantics(std::string_view text) {
  Semantics out;
  out.is_retweet = retweet_prefix_length(text) > 0;

  const auto urls = find_urls(text);
  for (const auto& s : urls) out.links.emplace_back(text.substr(s.begin, s.end - s.begin));

  std::string rest(text);
  blank(rest, urls);
  for (const auto& s : find_marked(rest, '#')) {
    out.hashtags.push_back(to_lower(std::string_view(rest).substr(s.begin + 1, s.end - s.begin - 1)));
  }
  for (const auto& s : find_marked(rest, '@')) {
    out.mentions.push_back(to_lower(std::string_view(rest).substr(s.begin + 1, s.end - s.begin - 1)));
  }
  return out;
}

std::string strip_markup(std::string_view text) {
  std::string out(text);
  const std::size_t rt = retweet_prefix_length(text);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(rt), ' ');
  blank(out, find_urls(out));
  blank(out, find_marked(out, '#'));
  blank(out, find_marked(out, '@'));
  return out;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && !is_ascii_alnum(text[pos])) ++pos;
    std::size_t end = pos;
    while (end < text.size() && is_ascii_alnum(text[end])) ++end;
    if (end > pos) words.push_back(to_lower(text.substr(pos, end - pos)));
    pos = end;
  }
  return words;
}

std::vector<std::string> tokenize_normalize(std::string_view text) {
  std::vector<std::string> tokens;
  for (auto& word : split_words(strip_markup(text))) {
    if (word.size() < 2 || is_stopword(word)) continue;
    tokens.push_back(porter_stem(word));
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

bool is_stopword(std::string_view word) {
  return std::binary_search(kStopwords.begin(), kStopwords.end(), word);
}

std::span<const std::string_view> stopwords() { return kStopwords; }

}  // namespace evfilter
