#include <cmath>
#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "newsynth/features.hpp"
#include "newsynth/lda.hpp"
#include "support.hpp"

using namespace newsynth;
using F = FeatureVector;

namespace {

CandidateLabel candidate(const std::string& spec) {
  CandidateLabel c;
  c.tokens = fixture::toks(spec);
  c.surface = surface_of(c.tokens);
  return c;
}

FeatureVector features_of(const Corpus& c, const std::string& spec) {
  const FeatureContext ctx(c, fit_lda(c, {.topics = 2, .iterations = 20}));
  return compute_features(candidate(spec), ctx);
}

}  // namespace

TEST(Features, LabelOnceInEveryDocumentHasEntropyLnN) {
  std::vector<NewsArticle> arts;
  for (int i = 0; i < 7; ++i)
    arts.push_back(fixture::article("a" + std::to_string(i), {fixture::toks("goal/n x" + std::to_string(i) + "/n")}));
  const auto f = features_of(fixture::corpus("t", arts), "goal/n");
  EXPECT_NEAR(f[F::cluster_entropy], std::log(7.0), 1e-12);
  EXPECT_EQ(f[F::df], 7.0);
  EXPECT_EQ(f[F::raw_tf], 7.0);
  EXPECT_NEAR(f[F::tfidf], 0.0, 1e-12);
}

TEST(Features, RightEntropyZeroWhenAlwaysFollowedBySameWord) {
  const Corpus c = fixture::corpus(
      "t", {fixture::article("a", {fixture::toks("p/n ticket/n sales/n"), fixture::toks("q/n ticket/n sales/n"),
                                   fixture::toks("ticket/n sales/n")})});
  const FeatureContext ctx(c, fit_lda(c, {.topics = 2, .iterations = 5}));
  const auto be = branching_entropy(candidate("ticket/n").tokens, ctx);
  EXPECT_EQ(be.right, 0.0);
  EXPECT_NEAR(be.left, std::log(3.0), 1e-12);  // p, q, sentence start
  // f7 is the smaller side, so it is 0 here.
  EXPECT_EQ(compute_features(candidate("ticket/n"), ctx)[F::independence_entropy], std::min(be.left, be.right));
}

TEST(Features, BranchingEntropyCountsBoundariesAsSymbols) {
  const Corpus c =
      fixture::corpus("t", {fixture::article("a", {fixture::toks("a/n x/n"), fixture::toks("x/n b/n"), fixture::toks("x/n")})});
  const FeatureContext ctx(c, fit_lda(c, {.topics = 2, .iterations = 5}));
  const auto be = branching_entropy(candidate("x/n").tokens, ctx);
  // left: a, <s>, <s>; right: </s>, b, </s>
  const double h = -(1.0 / 3) * std::log(1.0 / 3) - (2.0 / 3) * std::log(2.0 / 3);
  EXPECT_NEAR(be.left, h, 1e-12);
  EXPECT_NEAR(be.right, h, 1e-12);
}

TEST(Features, AbsentFromTitlesGivesZeroTitleFrequency) {
  const Corpus c = fixture::corpus(
      "t", {fixture::article("a", {fixture::toks("draw/n ceremony/n")}, 0, fixture::toks("other/n headline/n")),
            fixture::article("b", {fixture::toks("draw/n ceremony/n")}, 0, fixture::toks("draw/n ceremony/n draw/n ceremony/n"))});
  EXPECT_EQ(features_of(c, "draw/n ceremony/n")[F::title_freq], 2.0);
  EXPECT_EQ(features_of(c, "kremlin/n")[F::title_freq], 0.0);
}

TEST(Features, CountsAndLengths) {
  const Corpus c = fixture::corpus(
      "t", {fixture::article("a", {fixture::toks("世界杯/n 抽签/v 仪式/n"), fixture::toks("世界杯/n 抽签/v 仪式/n")}),
            fixture::article("b", {fixture::toks("z/n")}), fixture::article("c", {fixture::toks("y/n")})});
  const auto f = features_of(c, "世界杯/n 抽签/v 仪式/n");
  EXPECT_EQ(f[F::word_count], 3.0);
  EXPECT_EQ(f[F::char_count], 7.0);
  EXPECT_EQ(f[F::noun_count], 2.0);
  EXPECT_EQ(f[F::raw_tf], 2.0);
  EXPECT_EQ(f[F::df], 1.0);
  EXPECT_NEAR(f[F::tfidf], 2.0 * std::log(3.0), 1e-12);
  EXPECT_EQ(f[F::intra_cluster_sim], 1.0);
  EXPECT_EQ(f[F::cluster_entropy], 0.0);
}

TEST(Features, SyntacticContinuityMatchesHandComputation) {
  // Tokens: "a b" x3, "a c", "d b"  -> T = 10
  const Corpus c = fixture::corpus("t", {fixture::article("x", {fixture::toks("a/n b/n"), fixture::toks("a/n b/n"),
                                                                fixture::toks("a/n b/n"), fixture::toks("a/n c/n"),
                                                                fixture::toks("d/n b/n")})});
  const double T = 10;
  const double expected = std::log((3 / T) / ((4 / T) * (4 / T)));
  EXPECT_NEAR(features_of(c, "a/n b/n")[F::syntactic_continuity], expected, 1e-12);
  EXPECT_EQ(features_of(c, "a/n")[F::syntactic_continuity], 0.0);
}

TEST(Features, TrigramContinuityUsesTheBestSplit) {
  const Corpus c = fixture::corpus("t", {fixture::article("x", {fixture::toks("a/n b/n c/n"), fixture::toks("a/n b/n"),
                                                                fixture::toks("b/n c/n q/n")})});
  const double T = 8;
  // splits: (a)(b c): 2/8 * 2/8 ; (a b)(c): 2/8 * 2/8
  const double expected = std::log((1 / T) / ((2 / T) * (2 / T)));
  EXPECT_NEAR(features_of(c, "a/n b/n c/n")[F::syntactic_continuity], expected, 1e-12);
}

TEST(Features, IntraClusterSimilarityMatchesPairwiseBruteForce) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NewsArticle> arts;
    for (int a = 0; a < 6; ++a) {
      auto art = fixture::random_article(rng, "a" + std::to_string(a), 3 + rng() % 4, 6);
      if (a % 2 == 0) art.body.push_back(fixture::sentence(fixture::toks("key/n"), art.body.size()));
      arts.push_back(std::move(art));
    }
    const Corpus c = fixture::corpus("t", arts);
    std::vector<std::map<std::string, double>> docs;
    for (const auto& a : c.articles) {
      bool has = false;
      std::map<std::string, double> bag;
      for (const auto& s : a.body)
        for (const auto& t : s.tokens) {
          bag[t.text] += 1;
          has |= t.text == "key";
        }
      if (has) docs.push_back(bag);
    }
    double sum = 0;
    int pairs = 0;
    for (std::size_t i = 0; i < docs.size(); ++i)
      for (std::size_t j = i + 1; j < docs.size(); ++j) {
        sum += oracle::bag_cosine(docs[i], docs[j]);
        ++pairs;
      }
    EXPECT_NEAR(features_of(c, "key/n")[F::intra_cluster_sim], sum / pairs, 1e-9) << "trial " << trial;
  }
}

TEST(Features, TopicModelScoreIsGeometricMeanMaxedOverTopics) {
  // Two topics over vocabulary {x, y}; beta = 1 keeps the arithmetic simple.
  const TopicModel m({{"x", 0}, {"y", 1}}, {{3, 1}, {0, 2}}, {4, 2}, 1.0);
  EXPECT_NEAR(m.word_probability(0, "x"), 4.0 / 6.0, 1e-12);
  EXPECT_NEAR(m.word_probability(1, "y"), 3.0 / 4.0, 1e-12);
  EXPECT_NEAR(m.word_probability(0, "unseen"), 1.0 / 6.0, 1e-12);
  const auto label = fixture::toks("x y");
  const double k0 = std::sqrt((4.0 / 6.0) * (2.0 / 6.0));
  const double k1 = std::sqrt((1.0 / 4.0) * (3.0 / 4.0));
  EXPECT_NEAR(m.label_score(label), std::max(k0, k1), 1e-12);
}

TEST(Lda, IsDeterministicAndNormalized) {
  const Corpus c = ingest_corpus((fixture::data_dir() / "sample20.jsonl").string(), "russia world cup");
  const auto a = fit_lda(c);
  const auto b = fit_lda(c);
  EXPECT_EQ(a.topics(), 10u);
  std::set<std::string> vocab;
  for (const auto& art : c.articles)
    for (const auto& s : art.body)
      for (const auto& t : s.tokens) vocab.insert(t.text);
  EXPECT_EQ(a.vocabulary_size(), vocab.size());
  for (std::size_t k = 0; k < a.topics(); ++k) {
    double total = 0;
    for (const auto& w : vocab) {
      total += a.word_probability(k, w);
      EXPECT_EQ(a.word_probability(k, w), b.word_probability(k, w));
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Lda, SeparatesDisjointVocabularies) {
  std::vector<NewsArticle> arts;
  for (int i = 0; i < 10; ++i) {
    const std::string words = i % 2 ? "goal/n match/n referee/n goal/n match/n" : "radar/n missile/n launch/n radar/n missile/n";
    arts.push_back(fixture::article("a" + std::to_string(i), {fixture::toks(words), fixture::toks(words)}));
  }
  const Corpus c = fixture::corpus("t", arts);
  const auto m = fit_lda(c, {.topics = 2, .iterations = 200, .alpha = 0.1, .beta = 0.01});
  const std::size_t k = m.word_probability(0, "goal") > m.word_probability(1, "goal") ? 0 : 1;
  EXPECT_GT(m.word_probability(k, "match"), 0.2);
  EXPECT_LT(m.word_probability(k, "radar"), 0.05);
}

TEST(Features, BundledCorpusFeaturesAreFinite) {
  const Corpus c = ingest_corpus((fixture::data_dir() / "sample20.jsonl").string(), "russia world cup");
  auto cands = extract_candidates(c);
  const FeatureContext ctx(c, fit_lda(c));
  compute_all_features(cands, ctx);
  ASSERT_FALSE(cands.empty());
  for (const auto& cand : cands)
    for (std::size_t j = 0; j < F::kSize; ++j) EXPECT_TRUE(std::isfinite(cand.features[j])) << cand.surface << " f" << j + 1;
}
