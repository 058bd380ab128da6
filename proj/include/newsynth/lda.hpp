#pragma once

// Latent Dirichlet allocation fit by collapsed Gibbs sampling. Documents are
// article bodies; the fitted topic-word distributions feed the topic-model
// label feature.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "newsynth/corpus.hpp"

namespace newsynth {

struct LdaConfig {
  int topics = 10;
  int iterations = 200;
  double alpha = 50.0 / 10.0;
  double beta = 0.01;
  std::uint64_t seed = 20190601;
};

class TopicModel {
 public:
  TopicModel() = default;
  TopicModel(std::unordered_map<std::string, std::size_t> vocab, std::vector<std::vector<std::size_t>> topic_word,
             std::vector<std::size_t> topic_totals, double beta)
      : vocab_(std::move(vocab)),
        topic_word_(std::move(topic_word)),
        topic_totals_(std::move(topic_totals)),
        beta_(beta) {}

  std::size_t topics() const { return topic_totals_.size(); }
  std::size_t vocabulary_size() const { return vocab_.size(); }

  // Smoothed P(word | topic).
  double word_probability(std::size_t topic, const std::string& word) const {
    const double denom = static_cast<double>(topic_totals_[topic]) + static_cast<double>(vocab_.size()) * beta_;
    const auto it = vocab_.find(word);
    const double count = it == vocab_.end() ? 0.0 : static_cast<double>(topic_word_[topic][it->second]);
    return (count + beta_) / denom;
  }

  // max_k of the geometric mean of P(w|k) over the label's words.
  double label_score(std::span<const Token> words) const {
    if (words.empty() || topics() == 0) return 0.0;
    double best = 0.0;
    for (std::size_t k = 0; k < topics(); ++k) {
      double log_sum = 0.0;
      for (const auto& w : words) log_sum += std::log(word_probability(k, w.text));
      best = std::max(best, std::exp(log_sum / static_cast<double>(words.size())));
    }
    return best;
  }

 private:
  std::unordered_map<std::string, std::size_t> vocab_;
  std::vector<std::vector<std::size_t>> topic_word_;
  std::vector<std::size_t> topic_totals_;
  double beta_ = 0.01;
};

namespace detail {

// Uniform double in [0,1) from 53 random bits; identical across standard
// library implementations, unlike std::uniform_real_distribution.
inline double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

inline TopicModel fit_lda(const Corpus& corpus, const LdaConfig& cfg = {}) {
  const auto K = static_cast<std::size_t>(cfg.topics);
  std::unordered_map<std::string, std::size_t> vocab;
  std::vector<std::vector<std::size_t>> docs;
  for (const auto& a : corpus.articles) {
    std::vector<std::size_t> doc;
    for (const auto& s : a.body)
      for (const auto& t : s.tokens) {
        const auto [it, inserted] = vocab.try_emplace(t.text, vocab.size());
        doc.push_back(it->second);
      }
    docs.push_back(std::move(doc));
  }
  const std::size_t V = vocab.size();

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::vector<std::size_t>> topic_word(K, std::vector<std::size_t>(V, 0));
  std::vector<std::size_t> topic_totals(K, 0);
  std::vector<std::vector<std::size_t>> doc_topic(docs.size(), std::vector<std::size_t>(K, 0));
  std::vector<std::vector<std::size_t>> assignment(docs.size());

  for (std::size_t d = 0; d < docs.size(); ++d) {
    assignment[d].resize(docs[d].size());
    for (std::size_t i = 0; i < docs[d].size(); ++i) {
      const auto k = static_cast<std::size_t>(detail::unit_draw(rng) * static_cast<double>(K));
      assignment[d][i] = k;
      ++topic_word[k][docs[d][i]];
      ++topic_totals[k];
      ++doc_topic[d][k];
    }
  }

  const double vbeta = static_cast<double>(V) * cfg.beta;
  std::vector<double> cumulative(K);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (std::size_t d = 0; d < docs.size(); ++d) {
      for (std::size_t i = 0; i < docs[d].size(); ++i) {
        const std::size_t w = docs[d][i];
        const std::size_t old = assignment[d][i];
        --topic_word[old][w];
        --topic_totals[old];
        --doc_topic[d][old];

        double total = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
          total += (static_cast<double>(doc_topic[d][k]) + cfg.alpha) *
                   (static_cast<double>(topic_word[k][w]) + cfg.beta) /
                   (static_cast<double>(topic_totals[k]) + vbeta);
          cumulative[k] = total;
        }
        const double u = detail::unit_draw(rng) * total;
        std::size_t k = 0;
        while (k + 1 < K && cumulative[k] <= u) ++k;

        assignment[d][i] = k;
        ++topic_word[k][w];
        ++topic_totals[k];
        ++doc_topic[d][k];
      }
    }
  }
  return TopicModel(std::move(vocab), std::move(topic_word), std::move(topic_totals), cfg.beta);
}

}  // namespace newsynth
