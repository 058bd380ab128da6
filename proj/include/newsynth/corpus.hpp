#pragma once

// Document model, JSONL ingestion and the sparse term-vector substrate that
// every similarity in the pipeline is built on.

#include <algorithm>
#include <filesystem>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsynth/error.hpp"
#include "newsynth/text.hpp"

namespace newsynth {

using json = nlohmann::json;

enum class Pos { noun, verb, adverb, time_word, adjective, other };

inline std::string_view pos_name(Pos p) {
  switch (p) {
    case Pos::noun: return "noun";
    case Pos::verb: return "verb";
    case Pos::adverb: return "adverb";
    case Pos::time_word: return "time-word";
    case Pos::adjective: return "adjective";
    case Pos::other: return "other";
  }
  return "other";
}

// Maps a tagger's tag string onto the coarse tag set.
//
//   noun       n nh ni nl ns nz nd j (LTP), NN NNS NNP NNPS NR (Penn), "noun"
//   verb       v vd vn (LTP), VB VBD VBG VBN VBP VBZ VV VA VC VE (Penn), "verb"
//   adverb     d (LTP), RB RBR RBS AD (Penn), "adverb"
//   time-word  nt (LTP), NT (Chinese Penn), "time-word", "time"
//   adjective  a b (LTP), JJ JJR JJS (Penn), "adjective"
//   other      everything else
inline Pos parse_pos(std::string_view tag) {
  static const std::unordered_map<std::string_view, Pos> table = {
      {"noun", Pos::noun},        {"n", Pos::noun},          {"nh", Pos::noun},
      {"ni", Pos::noun},          {"nl", Pos::noun},         {"ns", Pos::noun},
      {"nz", Pos::noun},          {"nd", Pos::noun},         {"j", Pos::noun},
      {"NN", Pos::noun},          {"NNS", Pos::noun},        {"NNP", Pos::noun},
      {"NNPS", Pos::noun},        {"NR", Pos::noun},         {"verb", Pos::verb},
      {"v", Pos::verb},           {"vd", Pos::verb},         {"vn", Pos::verb},
      {"VB", Pos::verb},          {"VBD", Pos::verb},        {"VBG", Pos::verb},
      {"VBN", Pos::verb},         {"VBP", Pos::verb},        {"VBZ", Pos::verb},
      {"VV", Pos::verb},          {"VA", Pos::verb},         {"VC", Pos::verb},
      {"VE", Pos::verb},          {"adverb", Pos::adverb},   {"d", Pos::adverb},
      {"RB", Pos::adverb},        {"RBR", Pos::adverb},      {"RBS", Pos::adverb},
      {"AD", Pos::adverb},        {"time-word", Pos::time_word}, {"time", Pos::time_word},
      {"nt", Pos::time_word},     {"NT", Pos::time_word},    {"adjective", Pos::adjective},
      {"a", Pos::adjective},      {"b", Pos::adjective},     {"JJ", Pos::adjective},
      {"JJR", Pos::adjective},    {"JJS", Pos::adjective},   {"other", Pos::other},
  };
  const auto it = table.find(tag);
  return it == table.end() ? Pos::other : it->second;
}

struct Token {
  std::string text;
  Pos pos = Pos::other;
  std::size_t char_len = 0;

  Token() = default;
  Token(std::string t, Pos p) : text(std::move(t)), pos(p), char_len(text::char_count(text)) {}

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::size_t index = 0;
  // Raw sentence text as supplied; rendering always uses this.
  std::string text;

  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct NewsArticle {
  std::string id;
  Sentence title;
  std::vector<Sentence> body;
  std::int64_t published_at = 0;
  std::string source;

  friend bool operator==(const NewsArticle&, const NewsArticle&) = default;
};

struct Corpus {
  static constexpr std::size_t kDefaultMaxArticles = 100;

  std::string topic_name;
  std::vector<NewsArticle> articles;
  std::size_t max_articles = kDefaultMaxArticles;

  const NewsArticle* find(std::string_view id) const {
    for (const auto& a : articles)
      if (a.id == id) return &a;
    return nullptr;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

// Splits on whitespace and peels punctuation off both ends of each piece.
// Used when a corpus arrives without pre-computed tokens; every token is
// tagged `other`, so POS-sensitive filters see nothing to keep.
inline std::vector<Token> fallback_tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && text::is_space(text::first_code_point(s.substr(pos)))) {
      text::next_code_point(s, pos);
    }
    const std::size_t start = pos;
    while (pos < s.size()) {
      std::size_t probe = pos;
      if (text::is_space(text::next_code_point(s, probe))) break;
      pos = probe;
    }
    std::string_view piece = s.substr(start, pos - start);
    while (!piece.empty() && text::is_punct(text::first_code_point(piece))) {
      std::size_t skip = 0;
      text::next_code_point(piece, skip);
      piece.remove_prefix(skip);
    }
    while (!piece.empty() && text::is_punct(text::last_code_point(piece))) {
      std::size_t cut = piece.size() - 1;
      while (cut > 0 && (static_cast<unsigned char>(piece[cut]) >> 6) == 0x2) --cut;
      piece.remove_suffix(piece.size() - cut);
    }
    if (!piece.empty()) out.emplace_back(std::string(piece), Pos::other);
  }
  return out;
}

namespace detail {

inline std::vector<Token> parse_token_list(const json& arr, std::size_t line, const std::string& field) {
  if (!arr.is_array()) throw SchemaError(line, field);
  std::vector<Token> tokens;
  tokens.reserve(arr.size());
  for (const auto& pair : arr) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
      throw SchemaError(line, field);
    auto t = pair[0].get<std::string>();
    if (t.empty()) throw SchemaError(line, field, "contains an empty token");
    tokens.emplace_back(std::move(t), parse_pos(pair[1].get<std::string>()));
  }
  return tokens;
}

inline json token_list_json(const std::vector<Token>& tokens) {
  json arr = json::array();
  for (const auto& t : tokens) arr.push_back({t.text, pos_name(t.pos)});
  return arr;
}

}  // namespace detail

// Parses one article object; `line` is used only for error reporting.
inline NewsArticle parse_article(const json& obj, std::size_t line) {
  if (!obj.is_object()) throw SchemaError(line, "<object>", "is not a JSON object");
  const auto string_field = [&](const char* name) {
    const auto it = obj.find(name);
    if (it == obj.end() || !it->is_string()) throw SchemaError(line, name);
    return it->get<std::string>();
  };

  NewsArticle a;
  a.id = string_field("id");
  if (a.id.empty()) throw SchemaError(line, "id", "is empty");
  a.title.text = string_field("title");
  a.source = string_field("source");

  const auto ts = obj.find("published_at");
  if (ts == obj.end() || !ts->is_number_integer()) throw SchemaError(line, "published_at");
  a.published_at = ts->get<std::int64_t>();

  const auto body = obj.find("body");
  if (body == obj.end() || !body->is_array()) throw SchemaError(line, "body");
  if (body->empty()) throw SchemaError(line, "body", "is empty");

  if (const auto tt = obj.find("title_tokens"); tt != obj.end()) {
    a.title.tokens = detail::parse_token_list(*tt, line, "title_tokens");
  } else {
    a.title.tokens = fallback_tokenize(a.title.text);
  }

  const json* body_tokens = nullptr;
  if (const auto bt = obj.find("body_tokens"); bt != obj.end()) {
    if (!bt->is_array() || bt->size() != body->size())
      throw SchemaError(line, "body_tokens", "must have one token list per body sentence");
    body_tokens = &*bt;
  }

  for (std::size_t i = 0; i < body->size(); ++i) {
    const auto& s = (*body)[i];
    if (!s.is_string()) throw SchemaError(line, "body");
    Sentence sentence;
    sentence.index = i;
    sentence.text = s.get<std::string>();
    sentence.tokens = body_tokens ? detail::parse_token_list((*body_tokens)[i], line, "body_tokens")
                                  : fallback_tokenize(sentence.text);
    if (sentence.tokens.empty()) throw SchemaError(line, body_tokens ? "body_tokens" : "body", "has a sentence without tokens");
    a.body.push_back(std::move(sentence));
  }
  return a;
}

inline json article_to_json(const NewsArticle& a) {
  json body = json::array();
  json body_tokens = json::array();
  for (const auto& s : a.body) {
    body.push_back(s.text);
    body_tokens.push_back(detail::token_list_json(s.tokens));
  }
  return json{{"id", a.id},
              {"title", a.title.text},
              {"title_tokens", detail::token_list_json(a.title.tokens)},
              {"body", std::move(body)},
              {"body_tokens", std::move(body_tokens)},
              {"published_at", a.published_at},
              {"source", a.source}};
}

// Builds a corpus from already-parsed article objects (inline corpora).
inline Corpus corpus_from_json(const json& articles, std::string topic_name,
                               std::size_t max_articles = Corpus::kDefaultMaxArticles) {
  if (!articles.is_array()) throw SchemaError(0, "corpus", "must be an array of articles");
  Corpus c;
  c.topic_name = std::move(topic_name);
  c.max_articles = max_articles;
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < articles.size() && c.articles.size() < max_articles; ++i) {
    auto a = parse_article(articles[i], i + 1);
    if (!ids.insert(a.id).second) throw SchemaError(i + 1, "id", "is a duplicate");
    c.articles.push_back(std::move(a));
  }
  if (c.articles.empty()) throw Error("EmptyCorpus", "corpus contains no articles");
  return c;
}

inline json corpus_to_json(const Corpus& c) {
  json arts = json::array();
  for (const auto& a : c.articles) arts.push_back(article_to_json(a));
  return json{{"topic_name", c.topic_name}, {"max_articles", c.max_articles}, {"articles", std::move(arts)}};
}

inline Corpus corpus_from_serialized(const json& j) {
  return corpus_from_json(j.at("articles"), j.at("topic_name").get<std::string>(),
                          j.at("max_articles").get<std::size_t>());
}

// Default topic for a corpus file: its stem with '_' read as a space.
inline std::string topic_from_path(const std::string& path) {
  std::string stem = std::filesystem::path(path).stem().string();
  std::replace(stem.begin(), stem.end(), '_', ' ');
  return stem;
}

// Reads a JSONL corpus, one article per non-blank line, keeping the first
// `max_articles` in file order. Lines past the cap are not read.
inline Corpus ingest_corpus(const std::string& path, std::string topic_name,
                            std::size_t max_articles = Corpus::kDefaultMaxArticles) {
  if (max_articles == 0) throw Error("InvalidArgument", "max_articles must be positive");
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);

  Corpus c;
  c.topic_name = std::move(topic_name);
  c.max_articles = max_articles;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (c.articles.size() < max_articles && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error&) {
      throw SchemaError(line_no, "<json>", "is not valid JSON");
    }
    auto a = parse_article(obj, line_no);
    if (!ids.insert(a.id).second) throw SchemaError(line_no, "id", "is a duplicate");
    c.articles.push_back(std::move(a));
  }
  if (c.articles.empty()) throw Error("EmptyCorpus", "corpus file contains no articles: " + path, path);
  return c;
}

// Sparse non-negative term weights.
class TermVector {
 public:
  using Map = std::unordered_map<std::string, double>;

  void add(const std::string& term, double w = 1.0) { weights_[term] += w; }
  void set(const std::string& term, double w) { weights_[term] = w; }

  double get(const std::string& term) const {
    const auto it = weights_.find(term);
    return it == weights_.end() ? 0.0 : it->second;
  }

  void merge(const TermVector& other) {
    for (const auto& [t, w] : other.weights_) weights_[t] += w;
  }

  // Squared norm summed in sorted-term order so results do not depend on
  // hash-table layout.
  double norm() const {
    std::vector<double> sq;
    sq.reserve(weights_.size());
    for (const auto& kv : weights_) sq.push_back(kv.second * kv.second);
    std::sort(sq.begin(), sq.end());
    double s = 0;
    for (double v : sq) s += v;
    return std::sqrt(s);
  }

  bool is_zero() const {
    return std::all_of(weights_.begin(), weights_.end(), [](const auto& kv) { return kv.second == 0.0; });
  }

  std::size_t size() const { return weights_.size(); }
  const Map& weights() const { return weights_; }

 private:
  Map weights_;
};

inline double dot(const TermVector& a, const TermVector& b) {
  const auto& small = a.size() <= b.size() ? a.weights() : b.weights();
  const auto& large = a.size() <= b.size() ? b : a;
  std::vector<double> terms;
  terms.reserve(small.size());
  for (const auto& [t, w] : small) {
    const double v = large.get(t);
    if (v != 0.0) terms.push_back(w * v);
  }
  std::sort(terms.begin(), terms.end());
  double s = 0;
  for (double v : terms) s += v;
  return s;
}

inline double cosine(const TermVector& a, const TermVector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot(a, b) / (na * nb), 0.0, 1.0);
}

// Per-article document frequencies over body tokens.
struct CorpusStats {
  std::size_t documents = 0;
  std::unordered_map<std::string, std::size_t> df;

  double idf(const std::string& term) const {
    const auto it = df.find(term);
    if (it == df.end() || it->second == 0) return 0.0;
    return std::log(static_cast<double>(documents) / static_cast<double>(it->second));
  }
};

inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.documents = corpus.articles.size();
  for (const auto& a : corpus.articles) {
    std::unordered_set<std::string> seen;
    for (const auto& sent : a.body)
      for (const auto& t : sent.tokens) seen.insert(t.text);
    for (const auto& t : seen) ++s.df[t];
  }
  return s;
}

using StopWords = std::unordered_set<std::string>;

// Raw token counts.
inline TermVector term_vector(std::span<const Sentence> sentences, const StopWords* stopwords = nullptr) {
  TermVector v;
  for (const auto& s : sentences)
    for (const auto& t : s.tokens)
      if (!stopwords || !stopwords->contains(t.text)) v.add(t.text);
  return v;
}

// tf x ln(N/df); terms present in every document get weight 0.
inline TermVector term_vector(std::span<const Sentence> sentences, const CorpusStats& stats) {
  TermVector tf = term_vector(sentences);
  TermVector out;
  for (const auto& [t, w] : tf.weights()) out.set(t, w * stats.idf(t));
  return out;
}

inline TermVector term_vector(std::span<const Token> tokens) {
  TermVector v;
  for (const auto& t : tokens) v.add(t.text);
  return v;
}

inline StopWords load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  StopWords out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!line.empty()) out.insert(line);
  }
  return out;
}

}  // namespace newsynth
