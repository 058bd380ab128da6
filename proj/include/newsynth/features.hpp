#pragma once

// The twelve label features. Corpus-wide statistics are gathered once into a
// FeatureContext; compute_features is then a pure function per candidate.

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsynth/candidates.hpp"
#include "newsynth/corpus.hpp"
#include "newsynth/lda.hpp"

namespace newsynth {

struct Occurrence {
  std::size_t article = 0;
  std::size_t sentence = 0;
  std::size_t offset = 0;
};

class FeatureContext {
 public:
  FeatureContext(const Corpus& corpus, TopicModel topic_model)
      : corpus_(&corpus), topic_model_(std::move(topic_model)) {
    for (std::size_t a = 0; a < corpus.articles.size(); ++a) {
      const auto& article = corpus.articles[a];
      for (std::size_t s = 0; s < article.body.size(); ++s) {
        const std::span<const Token> toks(article.body[s].tokens);
        total_tokens_ += toks.size();
        for (std::size_t i = 0; i < toks.size(); ++i)
          for (std::size_t n = 1; n <= kMaxNgram && i + n <= toks.size(); ++n)
            occurrences_[ngram_key(toks.subspan(i, n))].push_back({a, s, i});
      }
      TermVector v = term_vector(std::span<const Sentence>(article.body));
      const double norm = v.norm();
      TermVector unit;
      for (const auto& [t, w] : v.weights()) unit.set(t, norm > 0 ? w / norm : 0.0);
      unit_docs_.push_back(std::move(unit));
    }
  }

  const Corpus& corpus() const { return *corpus_; }
  const TopicModel& topic_model() const { return topic_model_; }
  std::size_t total_tokens() const { return total_tokens_; }

  std::span<const Occurrence> occurrences(std::span<const Token> gram) const {
    const auto it = occurrences_.find(ngram_key(gram));
    if (it == occurrences_.end()) return {};
    return it->second;
  }

  std::size_t count(std::span<const Token> gram) const { return occurrences(gram).size(); }

  const TermVector& unit_document(std::size_t article) const { return unit_docs_[article]; }

 private:
  const Corpus* corpus_;
  TopicModel topic_model_;
  std::size_t total_tokens_ = 0;
  std::unordered_map<std::string, std::vector<Occurrence>> occurrences_;
  std::vector<TermVector> unit_docs_;
};

namespace detail {

inline double entropy(const std::map<std::string, std::size_t>& counts) {
  double total = 0;
  for (const auto& kv : counts) total += static_cast<double>(kv.second);
  if (total == 0) return 0.0;
  double h = 0;
  for (const auto& kv : counts) {
    const double p = static_cast<double>(kv.second) / total;
    h -= p * std::log(p);
  }
  return h;
}

}  // namespace detail

// Branching entropies over single-token neighbours. Sentence starts and ends
// are the neighbour symbols "<s>" and "</s>".
struct BranchingEntropy {
  double left = 0;
  double right = 0;
};

inline BranchingEntropy branching_entropy(std::span<const Token> gram, const FeatureContext& ctx) {
  std::map<std::string, std::size_t> left;
  std::map<std::string, std::size_t> right;
  for (const auto& occ : ctx.occurrences(gram)) {
    const auto& toks = ctx.corpus().articles[occ.article].body[occ.sentence].tokens;
    ++left[occ.offset == 0 ? std::string("<s>") : toks[occ.offset - 1].text];
    const std::size_t after = occ.offset + gram.size();
    ++right[after >= toks.size() ? std::string("</s>") : toks[after].text];
  }
  return {detail::entropy(left), detail::entropy(right)};
}

inline FeatureVector compute_features(const CandidateLabel& candidate, const FeatureContext& ctx) {
  using F = FeatureVector;
  const std::span<const Token> gram(candidate.tokens);
  const auto occ = ctx.occurrences(gram);
  const auto& corpus = ctx.corpus();
  const double N = static_cast<double>(corpus.articles.size());

  std::map<std::size_t, std::size_t> per_doc;
  for (const auto& o : occ) ++per_doc[o.article];
  const double tf = static_cast<double>(occ.size());
  const double df = static_cast<double>(per_doc.size());

  FeatureVector f;
  f[F::tfidf] = df > 0 ? tf * std::log(N / df) : 0.0;
  f[F::df] = df;
  f[F::word_count] = static_cast<double>(gram.size());
  double chars = 0;
  double nouns = 0;
  for (const auto& t : gram) {
    chars += static_cast<double>(t.char_len);
    if (t.pos == Pos::noun) ++nouns;
  }
  f[F::char_count] = chars;
  f[F::noun_count] = nouns;
  f[F::raw_tf] = tf;

  // Mean pairwise cosine of the supporting documents, from the identity
  // sum_{i<j} <u_i,u_j> = (|sum u|^2 - n) / 2 for unit vectors u.
  if (per_doc.size() <= 1) {
    f[F::intra_cluster_sim] = 1.0;
  } else {
    TermVector sum;
    for (const auto& kv : per_doc) sum.merge(ctx.unit_document(kv.first));
    const double n = df;
    const double sq = sum.norm() * sum.norm();
    f[F::intra_cluster_sim] = std::clamp((sq - n) / (n * (n - 1)), 0.0, 1.0);
  }

  double h = 0;
  for (const auto& kv : per_doc) {
    const double p = static_cast<double>(kv.second) / tf;
    h -= p * std::log(p);
  }
  f[F::cluster_entropy] = h;

  const auto be = branching_entropy(gram, ctx);
  f[F::independence_entropy] = std::min(be.left, be.right);

  double in_titles = 0;
  for (const auto& a : corpus.articles)
    in_titles += static_cast<double>(find_token_sequence(a.title.tokens, gram).size());
  f[F::title_freq] = in_titles;

  if (gram.size() >= 2 && tf > 0) {
    const double T = static_cast<double>(ctx.total_tokens());
    const double p_gram = tf / T;
    double best_split = 0;
    for (std::size_t cut = 1; cut < gram.size(); ++cut) {
      const double pl = static_cast<double>(ctx.count(gram.first(cut))) / T;
      const double pr = static_cast<double>(ctx.count(gram.subspan(cut))) / T;
      best_split = std::max(best_split, pl * pr);
    }
    f[F::syntactic_continuity] = std::log(p_gram / best_split);
  }

  f[F::topic_model_score] = ctx.topic_model().label_score(gram);
  return f;
}

inline void compute_all_features(std::vector<CandidateLabel>& candidates, const FeatureContext& ctx) {
  for (auto& c : candidates) c.features = compute_features(c, ctx);
}

}  // namespace newsynth
