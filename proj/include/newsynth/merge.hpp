#pragma once

// Collapses the top-scored candidates into final subtopic labels.

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "newsynth/candidates.hpp"
#include "newsynth/corpus.hpp"
#include "newsynth/text.hpp"

namespace newsynth {

struct SubtopicLabel {
  std::vector<Token> tokens;
  std::string surface;
  double score = 0.0;
  std::size_t tf = 0;
  // Surfaces of candidates folded into this label, itself included.
  std::vector<std::string> merged_from;
};

struct MergeConfig {
  std::size_t top_k = 20;
  double cos_threshold = 0.65;
  std::size_t max_merged_tokens = 5;
};

inline bool label_order(const SubtopicLabel& a, const SubtopicLabel& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.tf != b.tf) return a.tf > b.tf;
  return a.surface < b.surface;
}

// Occurrences of a token sequence across all body sentences.
inline std::size_t corpus_count(const Corpus& corpus, std::span<const Token> gram) {
  std::size_t n = 0;
  for (const auto& a : corpus.articles)
    for (const auto& s : a.body) n += find_token_sequence(s.tokens, gram).size();
  return n;
}

// tf vector of every body sentence that contains the label.
inline TermVector context_vector(const Corpus& corpus, std::span<const Token> gram) {
  TermVector v;
  for (const auto& a : corpus.articles)
    for (const auto& s : a.body)
      if (!find_token_sequence(s.tokens, gram).empty())
        for (const auto& t : s.tokens) v.add(t.text);
  return v;
}

// Length of the longest run of tokens appearing contiguously in both.
inline std::size_t longest_shared_run(std::span<const Token> a, std::span<const Token> b) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) {
      std::size_t k = 0;
      while (i + k < a.size() && j + k < b.size() && a[i + k].text == b[j + k].text) ++k;
      best = std::max(best, k);
    }
  return best;
}

// Joins two labels whose ends overlap by at least `min_overlap` tokens,
// preferring the longest overlap with `a` in front.
inline std::optional<std::vector<Token>> overlap_union(std::span<const Token> a, std::span<const Token> b,
                                                       std::size_t min_overlap = 2) {
  const auto try_join = [&](std::span<const Token> front,
                            std::span<const Token> back) -> std::optional<std::vector<Token>> {
    for (std::size_t ov = std::min(front.size(), back.size()); ov >= min_overlap && ov > 0; --ov) {
      bool ok = true;
      for (std::size_t k = 0; k < ov && ok; ++k) ok = front[front.size() - ov + k].text == back[k].text;
      if (ok) {
        std::vector<Token> out(front.begin(), front.end());
        out.insert(out.end(), back.begin() + static_cast<std::ptrdiff_t>(ov), back.end());
        return out;
      }
    }
    return std::nullopt;
  };
  if (auto u = try_join(a, b)) return u;
  return try_join(b, a);
}

inline bool surfaces_nested(const SubtopicLabel& a, const SubtopicLabel& b) {
  return text::contains_surface(a.surface, b.surface) || text::contains_surface(b.surface, a.surface);
}

// Takes the top_k ranked candidates and applies, in order:
//   1. partial overlap of >= 2 contiguous words: replace the pair with their
//      union n-gram (score of the higher one), provided the union occurs in
//      the corpus and stays within max_merged_tokens; otherwise keep the
//      higher-scored label.
//   2. one surface inside the other: keep the higher-scored label.
//   3. context cosine above cos_threshold: keep the higher-scored label.
// Output is in descending score order.
inline std::vector<SubtopicLabel> merge_labels(std::span<const CandidateLabel> ranked, const Corpus& corpus,
                                               const MergeConfig& cfg = {}) {
  std::vector<SubtopicLabel> labels;
  for (std::size_t i = 0; i < ranked.size() && labels.size() < cfg.top_k; ++i) {
    const auto& c = ranked[i];
    labels.push_back({c.tokens, c.surface, c.predicted_score, c.tf, {c.surface}});
  }
  std::stable_sort(labels.begin(), labels.end(), label_order);

  // Rule 1.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < labels.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < labels.size() && !changed; ++j) {
        auto& hi = labels[i];
        const auto& lo = labels[j];
        if (surfaces_nested(hi, lo) || longest_shared_run(hi.tokens, lo.tokens) < 2) continue;
        const auto joined = overlap_union(hi.tokens, lo.tokens);
        if (joined && joined->size() <= cfg.max_merged_tokens) {
          const std::size_t tf = corpus_count(corpus, *joined);
          if (tf > 0) {
            hi.tokens = *joined;
            hi.surface = surface_of(hi.tokens);
            hi.tf = tf;
          }
        }
        hi.merged_from.insert(hi.merged_from.end(), lo.merged_from.begin(), lo.merged_from.end());
        labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
      }
    }
  }

  // Rule 2.
  std::vector<SubtopicLabel> kept;
  for (auto& l : labels) {
    const auto host = std::find_if(kept.begin(), kept.end(), [&](const SubtopicLabel& k) { return surfaces_nested(k, l); });
    if (host == kept.end()) {
      kept.push_back(std::move(l));
    } else {
      host->merged_from.insert(host->merged_from.end(), l.merged_from.begin(), l.merged_from.end());
    }
  }

  // Rule 3.
  std::vector<SubtopicLabel> out;
  std::vector<TermVector> contexts;
  for (auto& l : kept) {
    TermVector ctx = context_vector(corpus, l.tokens);
    std::size_t host = out.size();
    for (std::size_t k = 0; k < out.size() && host == out.size(); ++k)
      if (cosine(ctx, contexts[k]) > cfg.cos_threshold) host = k;
    if (host == out.size()) {
      out.push_back(std::move(l));
      contexts.push_back(std::move(ctx));
    } else {
      out[host].merged_from.insert(out[host].merged_from.end(), l.merged_from.begin(), l.merged_from.end());
    }
  }
  std::stable_sort(out.begin(), out.end(), label_order);
  return out;
}

}  // namespace newsynth
