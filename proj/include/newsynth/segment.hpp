#pragma once

// Sentence-window TextTiling: cut an article where lexical cohesion between
// adjacent sentence windows dips into a deep valley.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "newsynth/corpus.hpp"

namespace newsynth {

struct TextBlock {
  std::string article_id;
  std::size_t start = 0;  // sentence range [start, end) of the article body
  std::size_t end = 0;
  std::int64_t published_at = 0;
  std::string block_id;

  std::size_t length() const { return end - start; }
  friend bool operator==(const TextBlock&, const TextBlock&) = default;
};

inline TextBlock make_block(const NewsArticle& a, std::size_t start, std::size_t end) {
  return {a.id, start, end, a.published_at, a.id + ":" + std::to_string(start)};
}

struct SegmentConfig {
  std::size_t window = 2;
  double depth_cutoff = 0.5;
  const StopWords* stopwords = nullptr;
};

// Similarity at gap i (between sentences i-1 and i), i = 1..n-1.
inline std::vector<double> gap_similarities(const NewsArticle& article, const SegmentConfig& cfg = {}) {
  const std::size_t n = article.body.size();
  const std::span<const Sentence> body(article.body);
  std::vector<double> g;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
    const std::size_t hi = std::min(n, i + cfg.window);
    g.push_back(cosine(term_vector(body.subspan(lo, i - lo), cfg.stopwords),
                       term_vector(body.subspan(i, hi - i), cfg.stopwords)));
  }
  return g;
}

// Depth of each gap relative to the peaks reached by climbing outward on
// both sides. Index k refers to gap k+1.
inline std::vector<double> depth_scores(std::span<const double> g) {
  std::vector<double> depth(g.size(), 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    double left_peak = g[k];
    for (std::size_t j = k; j > 0 && g[j - 1] >= left_peak; --j) left_peak = g[j - 1];
    double right_peak = g[k];
    for (std::size_t j = k + 1; j < g.size() && g[j] >= right_peak; ++j) right_peak = g[j];
    depth[k] = (left_peak - g[k]) + (right_peak - g[k]);
  }
  return depth;
}

inline std::vector<TextBlock> segment_article(const NewsArticle& article, const SegmentConfig& cfg = {}) {
  const std::size_t n = article.body.size();
  if (n == 0) return {};
  if (n < 2 * cfg.window + 1) return {make_block(article, 0, n)};

  const auto g = gap_similarities(article, cfg);
  const auto depth = depth_scores(g);

  double sum = 0;
  std::size_t positives = 0;
  for (double d : depth)
    if (d > 0) {
      sum += d;
      ++positives;
    }
  std::vector<TextBlock> blocks;
  if (positives == 0) return {make_block(article, 0, n)};
  const double mean = sum / static_cast<double>(positives);
  double var = 0;
  for (double d : depth)
    if (d > 0) var += (d - mean) * (d - mean);
  const double cutoff = mean + cfg.depth_cutoff * std::sqrt(var / static_cast<double>(positives));

  std::size_t start = 0;
  for (std::size_t k = 0; k < depth.size(); ++k) {
    // Small tolerance so that a lone valley (stddev 0) still clears its own mean.
    if (depth[k] > 0 && depth[k] >= cutoff - 1e-12) {
      blocks.push_back(make_block(article, start, k + 1));
      start = k + 1;
    }
  }
  blocks.push_back(make_block(article, start, n));
  return blocks;
}

inline std::vector<TextBlock> segment_corpus(const Corpus& corpus, const SegmentConfig& cfg = {}) {
  std::vector<TextBlock> out;
  for (const auto& a : corpus.articles) {
    auto blocks = segment_article(a, cfg);
    out.insert(out.end(), blocks.begin(), blocks.end());
  }
  return out;
}

// Sentences and rendered text of a block.
inline std::span<const Sentence> block_sentences(const Corpus& corpus, const TextBlock& b) {
  const auto* a = corpus.find(b.article_id);
  if (!a || b.end > a->body.size() || b.start >= b.end) return {};
  return std::span<const Sentence>(a->body).subspan(b.start, b.end - b.start);
}

inline std::string block_text(const Corpus& corpus, const TextBlock& b) {
  std::vector<std::string_view> pieces;
  for (const auto& s : block_sentences(corpus, b)) pieces.push_back(s.text);
  return text::join(pieces);
}

inline std::vector<Token> block_tokens(const Corpus& corpus, const TextBlock& b) {
  std::vector<Token> out;
  for (const auto& s : block_sentences(corpus, b)) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
  return out;
}

}  // namespace newsynth
