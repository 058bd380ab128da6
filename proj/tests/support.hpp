#pragma once

// Fixture builders and independent reference implementations shared by the
// unit tests and the acceptance runner. Nothing here calls into the code it
// is used to check, except for plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "newsynth/candidates.hpp"
#include "newsynth/corpus.hpp"
#include "newsynth/merge.hpp"
#include "newsynth/regression.hpp"

namespace fixture {

using newsynth::Corpus;
using newsynth::NewsArticle;
using newsynth::Pos;
using newsynth::Sentence;
using newsynth::Token;

inline std::filesystem::path data_dir() { return NEWSYNTH_DATA_DIR; }
inline std::filesystem::path corpora_dir() { return data_dir() / "corpora"; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("newsynth-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << body;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// "word/n other/v" -> tokens; a token without a tag is a noun.
inline std::vector<Token> toks(const std::string& spec) {
  std::vector<Token> out;
  std::istringstream in(spec);
  std::string piece;
  while (in >> piece) {
    const auto slash = piece.rfind('/');
    if (slash == std::string::npos || slash == 0) {
      out.emplace_back(piece, Pos::noun);
    } else {
      out.emplace_back(piece.substr(0, slash), newsynth::parse_pos(piece.substr(slash + 1)));
    }
  }
  return out;
}

inline Sentence sentence(const std::vector<Token>& tokens, std::size_t index = 0) {
  Sentence s;
  s.tokens = tokens;
  s.index = index;
  std::vector<std::string_view> words;
  for (const auto& t : tokens) words.push_back(t.text);
  s.text = newsynth::text::join(words) + ".";
  return s;
}

inline NewsArticle article(const std::string& id, const std::vector<std::vector<Token>>& body, std::int64_t t = 0,
                           const std::vector<Token>& title = {}) {
  NewsArticle a;
  a.id = id;
  a.published_at = t;
  a.source = "test";
  a.title = sentence(title.empty() ? body.front() : title);
  for (std::size_t i = 0; i < body.size(); ++i) a.body.push_back(sentence(body[i], i));
  return a;
}

inline Corpus corpus(std::string topic, std::vector<NewsArticle> articles) {
  Corpus c;
  c.topic_name = std::move(topic);
  c.articles = std::move(articles);
  return c;
}

// Random articles over a small tagged vocabulary.
inline NewsArticle random_article(std::mt19937_64& rng, const std::string& id, std::size_t sentences,
                                  std::size_t vocab = 12) {
  static const Pos tags[] = {Pos::noun, Pos::noun, Pos::verb, Pos::adjective, Pos::adverb, Pos::time_word, Pos::other};
  std::vector<std::vector<Token>> body;
  for (std::size_t s = 0; s < sentences; ++s) {
    std::vector<Token> sent;
    const std::size_t len = 2 + rng() % 6;
    for (std::size_t k = 0; k < len; ++k) {
      const std::size_t w = rng() % vocab;
      // Mostly a fixed tag per word, sometimes a stray one, so per-position
      // tag votes are not always unanimous.
      const Pos tag = rng() % 5 == 0 ? tags[rng() % 7] : tags[w % 7];
      sent.emplace_back("w" + std::to_string(w), tag);
    }
    body.push_back(std::move(sent));
  }
  return article(id, body, static_cast<std::int64_t>(rng() % 1000));
}

}  // namespace fixture

namespace oracle {

using newsynth::Corpus;
using newsynth::Pos;
using newsynth::Token;

struct Gram {
  std::vector<std::string> words;
  std::size_t tf = 0;
  std::vector<std::map<Pos, std::size_t>> votes;
};

// Exhaustive 1..3-gram enumeration with the four filters re-implemented from
// their plain-language definitions. Returns surfaces with their counts.
inline std::map<std::string, std::size_t> enumerate_candidates(const Corpus& c, std::size_t min_uni = 25,
                                                               std::size_t min_ngram = 10) {
  std::map<std::vector<std::string>, Gram> grams;
  for (const auto& a : c.articles)
    for (const auto& s : a.body)
      for (std::size_t i = 0; i < s.tokens.size(); ++i)
        for (std::size_t n = 1; n <= 3 && i + n <= s.tokens.size(); ++n) {
          std::vector<std::string> key;
          for (std::size_t k = 0; k < n; ++k) key.push_back(s.tokens[i + k].text);
          auto& g = grams[key];
          g.words = key;
          ++g.tf;
          g.votes.resize(n);
          for (std::size_t k = 0; k < n; ++k) ++g.votes[k][s.tokens[i + k].pos];
        }
  std::map<std::string, std::size_t> out;
  for (const auto& [key, g] : grams) {
    if (g.tf < (key.size() == 1 ? min_uni : min_ngram)) continue;
    std::vector<Pos> pos;
    for (const auto& v : g.votes) {
      Pos best = Pos::other;
      std::size_t most = 0;
      // Lowest enum value wins a tie: iterate in enum order, strict >.
      for (int p = 0; p < 6; ++p) {
        const auto it = v.find(static_cast<Pos>(p));
        if (it != v.end() && it->second > most) {
          most = it->second;
          best = it->first;
        }
      }
      pos.push_back(best);
    }
    bool bad = false;
    for (std::size_t k = 0; k < key.size(); ++k) {
      if (pos[k] == Pos::adverb || pos[k] == Pos::time_word) bad = true;
      // Bare years and day numbers count as time words even when untagged.
      if (std::all_of(key[k].begin(), key[k].end(), [](char ch) { return ch >= '0' && ch <= '9'; })) bad = true;
    }
    if (key.size() == 1 && pos[0] != Pos::noun && pos[0] != Pos::verb) bad = true;
    std::string surface;
    for (std::size_t k = 0; k < key.size(); ++k) surface += (k ? " " : "") + key[k];
    // Whole-word substring of the topic name.
    const std::string padded_topic = " " + c.topic_name + " ";
    if (padded_topic.find(" " + surface + " ") != std::string::npos) bad = true;
    if (!bad) out[surface] = g.tf;
  }
  return out;
}

// Dense power iteration on the explicit Google-style matrix
// M = d * P^T + (1-d) * r 1^T, with dangling rows of P replaced by r.
inline std::vector<double> dense_pagerank(const std::vector<std::vector<double>>& w, const std::vector<double>& r,
                                          double d = 0.85, int iterations = 5000) {
  const std::size_t n = w.size();
  std::vector<std::vector<double>> P(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0;
    for (double v : w[i]) row += v;
    for (std::size_t j = 0; j < n; ++j) P[i][j] = row > 0 ? w[i][j] / row : r[j];
  }
  std::vector<std::vector<double>> M(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) M[j][i] = d * P[i][j] + (1 - d) * r[j];
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> y(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) y[j] += M[j][i] * x[i];
    double diff = 0;
    for (std::size_t j = 0; j < n; ++j) diff += std::abs(y[j] - x[j]);
    x = y;
    if (diff < 1e-15) break;
  }
  return x;
}

// Average ranks (1-based) with ties sharing their mean rank.
inline std::vector<double> ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double mean = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = mean;
    i = j + 1;
  }
  return r;
}

inline double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

// Sparse cosine from scratch, over token-text bags.
inline double bag_cosine(const std::map<std::string, double>& a, const std::map<std::string, double>& b) {
  double dotp = 0, na = 0, nb = 0;
  for (const auto& [k, v] : a) {
    na += v * v;
    if (const auto it = b.find(k); it != b.end()) dotp += v * it->second;
  }
  for (const auto& kv : b) nb += kv.second * kv.second;
  if (na == 0 || nb == 0) return 0;
  return dotp / std::sqrt(na * nb);
}

// Bag of every token in every body sentence containing `words` contiguously.
inline std::map<std::string, double> context_bag(const Corpus& c, const std::vector<std::string>& words) {
  std::map<std::string, double> bag;
  for (const auto& a : c.articles)
    for (const auto& s : a.body) {
      bool hit = false;
      for (std::size_t i = 0; i + words.size() <= s.tokens.size() && !hit; ++i) {
        hit = true;
        for (std::size_t k = 0; k < words.size() && hit; ++k) hit = s.tokens[i + k].text == words[k];
      }
      if (hit)
        for (const auto& t : s.tokens) bag[t.text] += 1;
    }
  return bag;
}

inline std::vector<std::string> words_of(const std::string& surface) {
  std::vector<std::string> out;
  std::istringstream in(surface);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// Token-level containment: is `inner` a contiguous run inside `outer`?
inline bool contains_run(const std::vector<std::string>& outer, const std::vector<std::string>& inner) {
  if (inner.empty() || inner.size() > outer.size()) return false;
  for (std::size_t i = 0; i + inner.size() <= outer.size(); ++i)
    if (std::equal(inner.begin(), inner.end(), outer.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  return false;
}

// Post-conditions of label merging: at most top_k labels, none nested in
// another, no pair with context cosine above the threshold.
inline std::string merge_violation(const Corpus& c, const std::vector<newsynth::SubtopicLabel>& out,
                                   std::size_t top_k = 20, double threshold = 0.65) {
  if (out.size() > top_k) return "more than top_k labels";
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (i == j) continue;
      const auto a = words_of(out[i].surface);
      const auto b = words_of(out[j].surface);
      if (contains_run(a, b)) return "'" + out[j].surface + "' is inside '" + out[i].surface + "'";
      if (i < j && bag_cosine(context_bag(c, a), context_bag(c, b)) > threshold)
        return "'" + out[i].surface + "' and '" + out[j].surface + "' have similar contexts";
    }
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i - 1].score < out[i].score) return "not in descending score order";
  return {};
}

}  // namespace oracle
