#pragma once

// Per-subtopic block ranking: exact-match assignment, random walk with
// restart over a block-similarity graph, MMR de-duplication, and final
// chronological ordering.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "newsynth/candidates.hpp"
#include "newsynth/corpus.hpp"
#include "newsynth/error.hpp"
#include "newsynth/segment.hpp"

namespace newsynth {

// Blocks whose concatenated tokens contain `label` contiguously.
inline std::vector<TextBlock> assign_blocks(std::span<const TextBlock> blocks, std::span<const Token> label,
                                            const Corpus& corpus) {
  std::vector<TextBlock> out;
  for (const auto& b : blocks) {
    const auto toks = block_tokens(corpus, b);
    if (!find_token_sequence(toks, label).empty()) out.push_back(b);
  }
  return out;
}

struct BlockGraph {
  std::vector<TextBlock> vertices;
  std::vector<TermVector> vectors;
  std::vector<std::vector<double>> weights;  // symmetric, zero diagonal
  std::vector<double> restart;               // sums to 1

  std::size_t size() const { return vertices.size(); }
};

// Normalizes raw restart affinities; all-zero (or empty) becomes uniform.
inline std::vector<double> normalize_restart(std::vector<double> r) {
  double sum = 0;
  for (double v : r) sum += v;
  if (!(sum > 0)) {
    std::fill(r.begin(), r.end(), r.empty() ? 0.0 : 1.0 / static_cast<double>(r.size()));
    return r;
  }
  for (double& v : r) v /= sum;
  return r;
}

inline BlockGraph build_graph(std::vector<TextBlock> blocks, const Corpus& corpus,
                              std::span<const Token> label = {}) {
  BlockGraph g;
  g.vertices = std::move(blocks);
  const std::size_t n = g.vertices.size();
  for (const auto& b : g.vertices) g.vectors.push_back(term_vector(block_sentences(corpus, b)));
  g.weights.assign(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.weights[i][j] = g.weights[j][i] = cosine(g.vectors[i], g.vectors[j]);
  std::vector<double> affinity(n, 0.0);
  if (!label.empty()) {
    const TermVector lv = term_vector(label);
    for (std::size_t i = 0; i < n; ++i) affinity[i] = cosine(g.vectors[i], lv);
  }
  g.restart = normalize_restart(std::move(affinity));
  return g;
}

struct TextRankConfig {
  double damping = 0.85;
  double tol = 1e-6;
  int max_iter = 1000;
};

// Fixed point of ws = (1-d) r + d P^T ws, P the row-normalized weights, with
// dangling rows replaced by r. Iterates from uniform and stops once the
// a-posteriori L1 error bound d/(1-d) * |ws_t - ws_{t-1}|_1 drops below tol.
inline std::vector<double> textrank(std::span<const std::vector<double>> weights, std::span<const double> restart,
                                    const TextRankConfig& cfg = {}) {
  const std::size_t n = weights.size();
  if (n == 0) throw Error("NoVertices", "textrank needs at least one vertex");
  if (restart.size() != n) throw Error("InvalidArgument", "restart vector size does not match graph");
  const double d = cfg.damping;

  std::vector<double> out_weight(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out_weight[i] += weights[i][j];

  std::vector<double> ws(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  const double bound_scale = d < 1.0 ? d / (1.0 - d) : 1.0;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    double dangling = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (out_weight[i] <= 0) dangling += ws[i];
    for (std::size_t j = 0; j < n; ++j) {
      double in = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (out_weight[i] > 0) in += weights[i][j] / out_weight[i] * ws[i];
      next[j] = (1.0 - d) * restart[j] + d * (in + dangling * restart[j]);
    }
    double delta = 0;
    for (std::size_t j = 0; j < n; ++j) delta += std::abs(next[j] - ws[j]);
    ws.swap(next);
    if (bound_scale * delta < cfg.tol) break;
  }
  return ws;
}

inline std::vector<double> textrank(const BlockGraph& g, const TextRankConfig& cfg = {}) {
  return textrank(g.weights, g.restart, cfg);
}

struct RankedBlock {
  TextBlock block;
  double ws = 0.0;
  std::size_t mmr_rank = 0;
};

struct ScoredBlock {
  TextBlock block;
  double ws = 0.0;
  TermVector vector;
};

// Greedy MMR: repeatedly take argmax of lambda*ws - (1-lambda)*max_sim to
// the already-selected set; ties prefer higher ws, then smaller block_id.
inline std::vector<RankedBlock> mmr_select(std::span<const ScoredBlock> scored, double lambda, std::size_t m) {
  if (lambda < 0 || lambda > 1) throw Error("InvalidArgument", "MMR lambda must lie in [0,1]");
  std::vector<RankedBlock> picked;
  std::vector<std::size_t> chosen;
  std::vector<bool> used(scored.size(), false);
  std::vector<double> max_sim(scored.size(), 0.0);
  while (picked.size() < m && picked.size() < scored.size()) {
    std::size_t best = scored.size();
    double best_value = 0;
    for (std::size_t i = 0; i < scored.size(); ++i) {
      if (used[i]) continue;
      const double value = lambda * scored[i].ws - (1.0 - lambda) * max_sim[i];
      if (best == scored.size() || value > best_value ||
          (value == best_value && (scored[i].ws > scored[best].ws ||
                                   (scored[i].ws == scored[best].ws &&
                                    scored[i].block.block_id < scored[best].block.block_id)))) {
        best = i;
        best_value = value;
      }
    }
    used[best] = true;
    picked.push_back({scored[best].block, scored[best].ws, picked.size()});
    for (std::size_t i = 0; i < scored.size(); ++i)
      if (!used[i]) max_sim[i] = std::max(max_sim[i], cosine(scored[i].vector, scored[best].vector));
  }
  return picked;
}

// Earlier articles first; blocks of one article in their original order.
inline bool chronological(const TextBlock& a, const TextBlock& b) {
  return std::tie(a.published_at, a.article_id, a.start) < std::tie(b.published_at, b.article_id, b.start);
}

inline std::vector<TextBlock> order_blocks(std::vector<TextBlock> blocks) {
  std::stable_sort(blocks.begin(), blocks.end(), chronological);
  return blocks;
}

struct RankConfig {
  TextRankConfig textrank;
  double mmr_lambda = 0.7;
};

// Full per-label ranking: every candidate block in MMR order.
inline std::vector<RankedBlock> rank_label_blocks(std::span<const TextBlock> all_blocks, std::span<const Token> label,
                                                  const Corpus& corpus, const RankConfig& cfg = {}) {
  auto candidates = assign_blocks(all_blocks, label, corpus);
  if (candidates.empty()) return {};
  const BlockGraph graph = build_graph(std::move(candidates), corpus, label);
  const auto ws = textrank(graph, cfg.textrank);
  std::vector<ScoredBlock> scored;
  for (std::size_t i = 0; i < graph.size(); ++i) scored.push_back({graph.vertices[i], ws[i], graph.vectors[i]});
  return mmr_select(scored, cfg.mmr_lambda, scored.size());
}

}  // namespace newsynth
