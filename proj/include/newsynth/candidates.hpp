#pragma once

// Candidate subtopic labels: within-sentence 1..3-grams that are frequent
// enough, are not part of the topic name, carry no time words or adverbs, and
// (as unigrams) are nouns or verbs.

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "newsynth/corpus.hpp"
#include "newsynth/text.hpp"

namespace newsynth {

inline constexpr std::size_t kMaxNgram = 3;

struct FeatureVector {
  static constexpr std::size_t kSize = 12;
  enum Index : std::size_t {
    tfidf,
    df,
    word_count,
    char_count,
    intra_cluster_sim,
    cluster_entropy,
    independence_entropy,
    title_freq,
    syntactic_continuity,
    noun_count,
    topic_model_score,
    raw_tf,
  };
  static constexpr std::array<std::string_view, kSize> names = {
      "tfidf",        "df",         "word_count",        "char_count", "intra_cluster_sim",
      "cluster_entropy", "independence_entropy", "title_freq", "syntactic_continuity",
      "noun_count",   "topic_model_score", "raw_tf"};

  std::array<double, kSize> values{};

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct CandidateLabel {
  std::vector<Token> tokens;
  std::string surface;
  std::size_t tf = 0;
  FeatureVector features;
  double predicted_score = 0.0;
};

struct ExtractionConfig {
  std::size_t min_count_unigram = 25;
  std::size_t min_count_ngram = 10;
};

inline std::string surface_of(std::span<const Token> tokens) {
  std::vector<std::string_view> pieces;
  pieces.reserve(tokens.size());
  for (const auto& t : tokens) pieces.push_back(t.text);
  return text::join(pieces);
}

// Identity of an n-gram by token texts.
inline std::string ngram_key(std::span<const Token> tokens) {
  std::string key;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) key.push_back('\x1f');
    key += tokens[i].text;
  }
  return key;
}

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Digits optionally followed by a single date/time unit ("2018", "2018年",
// "6月", "10:30", "5pm").
inline bool is_numeric_time(std::string_view s) {
  const auto cps = text::decode(s);
  std::size_t i = 0;
  const auto digit = [](char32_t c) { return (c >= '0' && c <= '9') || (c >= 0xFF10 && c <= 0xFF19); };
  while (i < cps.size() && digit(cps[i])) ++i;
  if (i == 0) return false;
  if (i == cps.size()) return true;
  if (cps[i] == ':' ) {
    std::size_t j = i + 1;
    while (j < cps.size() && digit(cps[j])) ++j;
    return j == cps.size() && j > i + 1;
  }
  static const std::u32string units = U"年月日号时点分秒";
  if (i + 1 == cps.size() && units.find(cps[i]) != std::u32string::npos) return true;
  static const std::array<std::string_view, 7> suffixes = {"am", "pm", "h", "th", "st", "nd", "rd"};
  const std::string tail = ascii_lower(s.substr(s.size() - (cps.size() - i)));
  return std::find(suffixes.begin(), suffixes.end(), tail) != suffixes.end();
}

}  // namespace detail

// Tagged time words plus a small lexicon and numeric date patterns, so that
// untagged or mis-tagged corpora still drop obvious temporal expressions.
inline bool is_time_word(const Token& t) {
  if (t.pos == Pos::time_word) return true;
  static const std::unordered_set<std::string> lexicon = {
      "今天", "昨天", "明天", "前天", "后天", "今年", "去年", "明年", "目前", "现在",
      "当时", "近日", "日前", "此前", "上午", "下午", "晚上", "凌晨", "当天", "今日",
      "周一", "周二", "周三", "周四", "周五", "周六", "周日", "星期一", "星期二", "星期三",
      "星期四", "星期五", "星期六", "星期日", "today", "yesterday", "tomorrow", "tonight",
      "now", "currently", "monday", "tuesday", "wednesday", "thursday", "friday", "saturday",
      "sunday", "january", "february", "march", "april", "june", "july", "august",
      "september", "october", "november", "december"};
  return lexicon.contains(detail::ascii_lower(t.text)) || detail::is_numeric_time(t.text);
}

// The four candidate filters, minus the frequency threshold.
inline bool passes_label_filters(std::span<const Token> tokens, std::string_view topic_name) {
  if (tokens.empty() || tokens.size() > kMaxNgram) return false;
  for (const auto& t : tokens)
    if (t.pos == Pos::adverb || is_time_word(t)) return false;
  if (tokens.size() == 1 && tokens[0].pos != Pos::noun && tokens[0].pos != Pos::verb) return false;
  // contains_surface applies a word-boundary check for space-delimited text.
  return !text::contains_surface(topic_name, surface_of(tokens));
}

namespace detail {

struct NgramTally {
  std::size_t count = 0;
  std::vector<Token> first;  // token texts from the first occurrence
  std::vector<std::array<std::size_t, 6>> pos_votes;
};

// Majority tag per position; ties resolve to the lowest enum value.
inline std::vector<Token> majority_tokens(const NgramTally& tally) {
  std::vector<Token> tokens = tally.first;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& votes = tally.pos_votes[i];
    const auto best = std::max_element(votes.begin(), votes.end());
    tokens[i].pos = static_cast<Pos>(best - votes.begin());
  }
  return tokens;
}

}  // namespace detail

// Every qualifying n-gram exactly once, ordered by n-gram key. An n-gram's
// tags are the per-position majority over its occurrences.
inline std::vector<CandidateLabel> extract_candidates(const Corpus& corpus, const ExtractionConfig& cfg = {}) {
  std::map<std::string, detail::NgramTally> tallies;
  for (const auto& article : corpus.articles) {
    for (const auto& sentence : article.body) {
      const std::span<const Token> toks(sentence.tokens);
      for (std::size_t start = 0; start < toks.size(); ++start) {
        for (std::size_t n = 1; n <= kMaxNgram && start + n <= toks.size(); ++n) {
          const auto gram = toks.subspan(start, n);
          auto& tally = tallies[ngram_key(gram)];
          if (tally.count++ == 0) {
            tally.first.assign(gram.begin(), gram.end());
            tally.pos_votes.assign(n, {});
          }
          for (std::size_t i = 0; i < n; ++i) ++tally.pos_votes[i][static_cast<std::size_t>(gram[i].pos)];
        }
      }
    }
  }

  std::vector<CandidateLabel> out;
  for (const auto& [key, tally] : tallies) {
    const std::size_t threshold = tally.first.size() == 1 ? cfg.min_count_unigram : cfg.min_count_ngram;
    if (tally.count < threshold) continue;
    auto tokens = detail::majority_tokens(tally);
    if (!passes_label_filters(tokens, corpus.topic_name)) continue;
    CandidateLabel c;
    c.surface = surface_of(tokens);
    c.tokens = std::move(tokens);
    c.tf = tally.count;
    out.push_back(std::move(c));
  }
  return out;
}

// Start offsets of `needle` inside `hay`, comparing token texts.
inline std::vector<std::size_t> find_token_sequence(std::span<const Token> hay, std::span<const Token> needle) {
  std::vector<std::size_t> hits;
  if (needle.empty() || needle.size() > hay.size()) return hits;
  for (std::size_t i = 0; i + needle.size() <= hay.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < needle.size() && match; ++j) match = hay[i + j].text == needle[j].text;
    if (match) hits.push_back(i);
  }
  return hits;
}

}  // namespace newsynth
