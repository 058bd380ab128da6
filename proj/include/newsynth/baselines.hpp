#pragma once

// Comparison summarizers (Lead, Coverage, Centroid, TextRank over sentence or
// block units) and the P@k label-evaluation harness.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsynth/corpus.hpp"
#include "newsynth/error.hpp"
#include "newsynth/rank.hpp"
#include "newsynth/regression.hpp"
#include "newsynth/segment.hpp"
#include "newsynth/synth.hpp"

namespace newsynth {

enum class BaselineMethod { lead, coverage, centroid, textrank };
enum class Unit { sentence, block };

struct BaselineSpec {
  BaselineMethod method;
  Unit unit;

  std::string name() const {
    static const char* methods[] = {"Lead", "Coverage", "Centroid", "TextRank"};
    return std::string(methods[static_cast<int>(method)]) + (unit == Unit::sentence ? "-sen" : "-blk");
  }
};

// The six supported combinations, in report order.
inline const std::vector<BaselineSpec>& all_baselines() {
  static const std::vector<BaselineSpec> specs = {
      {BaselineMethod::lead, Unit::sentence},     {BaselineMethod::coverage, Unit::sentence},
      {BaselineMethod::centroid, Unit::sentence}, {BaselineMethod::textrank, Unit::sentence},
      {BaselineMethod::centroid, Unit::block},    {BaselineMethod::textrank, Unit::block}};
  return specs;
}

inline BaselineSpec parse_baseline(std::string_view name) {
  for (const auto& s : all_baselines()) {
    std::string lower = s.name();
    for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (name == s.name() || name == lower) return s;
  }
  throw Error("UnknownMethod", "unknown baseline method: " + std::string(name), std::string(name));
}

struct SummaryUnit {
  TextBlock block;
  std::string text;
  TermVector vector;
  std::size_t words = 0;
};

inline std::vector<SummaryUnit> summary_units(const Corpus& corpus, Unit unit, const SegmentConfig& seg = {}) {
  std::vector<TextBlock> blocks;
  if (unit == Unit::sentence) {
    for (const auto& a : corpus.articles)
      for (std::size_t i = 0; i < a.body.size(); ++i) blocks.push_back(make_block(a, i, i + 1));
  } else {
    blocks = segment_corpus(corpus, seg);
  }
  std::vector<SummaryUnit> units;
  units.reserve(blocks.size());
  for (auto& b : blocks) {
    SummaryUnit u;
    u.text = block_text(corpus, b);
    u.vector = term_vector(block_sentences(corpus, b));
    u.words = text::word_count(u.text);
    u.block = std::move(b);
    units.push_back(std::move(u));
  }
  return units;
}

namespace detail {

// Takes units in `order` until the budget is met; the last unit may
// overshoot it by at most its own length.
inline std::vector<std::size_t> take_budget(std::span<const std::size_t> order, std::span<const SummaryUnit> units,
                                            std::size_t budget) {
  std::vector<std::size_t> picked;
  std::size_t words = 0;
  for (std::size_t idx : order) {
    if (words >= budget) break;
    picked.push_back(idx);
    words += units[idx].words;
  }
  return picked;
}

inline std::vector<std::size_t> rank_by(std::span<const SummaryUnit> units, const std::vector<double>& score) {
  std::vector<std::size_t> order(units.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return chronological(units[a].block, units[b].block);
  });
  return order;
}

}  // namespace detail

struct BaselineResult {
  SynthesisArticle article;
  std::vector<std::size_t> selected;  // indices into the unit list
  double redundancy = 0.0;
};

// Mean pairwise cosine between selected units (0 for fewer than two).
inline double redundancy(std::span<const SummaryUnit> units, std::span<const std::size_t> selected) {
  if (selected.size() < 2) return 0.0;
  double sum = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < selected.size(); ++i)
    for (std::size_t j = i + 1; j < selected.size(); ++j) {
      sum += cosine(units[selected[i]].vector, units[selected[j]].vector);
      ++pairs;
    }
  return sum / static_cast<double>(pairs);
}

inline BaselineResult baseline_summarize(BaselineSpec spec, const Corpus& corpus, std::size_t target_words,
                                         const SegmentConfig& seg = {}, const TextRankConfig& tr = {}) {
  if ((spec.method == BaselineMethod::lead || spec.method == BaselineMethod::coverage) && spec.unit != Unit::sentence)
    throw Error("UnknownMethod", "unsupported baseline: " + spec.name(), spec.name());

  const auto units = summary_units(corpus, spec.unit, seg);
  std::vector<std::size_t> picked;

  switch (spec.method) {
    case BaselineMethod::lead: {
      std::vector<std::size_t> order(units.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = units[a].block;
        const auto& y = units[b].block;
        if (x.published_at != y.published_at) return x.published_at > y.published_at;
        if (x.article_id != y.article_id) return x.article_id < y.article_id;
        return x.start < y.start;
      });
      picked = detail::take_budget(order, units, target_words);
      break;
    }
    case BaselineMethod::coverage: {
      std::set<std::string> covered;
      std::vector<bool> used(units.size(), false);
      std::size_t words = 0;
      while (words < target_words && picked.size() < units.size()) {
        std::size_t best = units.size();
        std::size_t best_gain = 0;
        for (std::size_t i = 0; i < units.size(); ++i) {
          if (used[i]) continue;
          std::size_t gain = 0;
          for (const auto& kv : units[i].vector.weights()) gain += covered.contains(kv.first) ? 0 : 1;
          if (best == units.size() || gain > best_gain ||
              (gain == best_gain && chronological(units[i].block, units[best].block))) {
            best = i;
            best_gain = gain;
          }
        }
        used[best] = true;
        picked.push_back(best);
        words += units[best].words;
        for (const auto& kv : units[best].vector.weights()) covered.insert(kv.first);
      }
      break;
    }
    case BaselineMethod::centroid: {
      TermVector centroid;
      for (const auto& u : units) centroid.merge(u.vector);
      std::vector<double> score;
      for (const auto& u : units) score.push_back(cosine(u.vector, centroid));
      picked = detail::take_budget(detail::rank_by(units, score), units, target_words);
      break;
    }
    case BaselineMethod::textrank: {
      if (units.empty()) break;
      const std::size_t n = units.size();
      std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) w[i][j] = w[j][i] = cosine(units[i].vector, units[j].vector);
      const auto ws = textrank(w, normalize_restart(std::vector<double>(n, 0.0)), tr);
      picked = detail::take_budget(detail::rank_by(units, ws), units, target_words);
      break;
    }
  }

  BaselineResult result;
  result.article.topic_name = corpus.topic_name;
  SubtopicSection section;
  for (std::size_t idx : picked) section.paragraphs.push_back(make_paragraph(corpus, units[idx].block));
  result.article.sections.push_back(std::move(section));
  result.article.word_count = article_word_count(result.article);
  result.redundancy = redundancy(units, picked);
  result.selected = std::move(picked);
  return result;
}

// Fraction of the top k predictions whose gold score is positive; labels
// without a gold entry count as negatives and the denominator is always k.
inline double precision_at_k(std::span<const std::string> predicted, const std::map<std::string, double>& gold,
                             std::size_t k) {
  if (k == 0) throw Error("InvalidArgument", "k must be >= 1");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size() && i < k; ++i) {
    const auto it = gold.find(predicted[i]);
    if (it != gold.end() && it->second > 0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

struct LabeledTopic {
  std::string topic;
  std::vector<TrainingExample> examples;
};

inline constexpr std::array<std::size_t, 3> kPrecisionCutoffs = {5, 10, 20};

struct FoldResult {
  std::string topic;
  std::array<double, 3> precision{};  // P@5, P@10, P@20
};

struct MethodStats {
  std::string method;
  std::size_t word_count = 0;
  double redundancy = 0.0;
};

struct EvalReport {
  std::vector<FoldResult> folds;
  std::array<double, 3> macro{};
  std::vector<MethodStats> methods;
};

// Held-out ranking: predicted score desc, raw tf desc, surface.
inline std::vector<std::string> rank_examples(const RegressionModel& model, std::span<const TrainingExample> examples) {
  std::vector<std::pair<double, const TrainingExample*>> scored;
  for (const auto& e : examples) scored.emplace_back(model.predict(e.features), &e);
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    const double ta = a.second->features[FeatureVector::raw_tf];
    const double tb = b.second->features[FeatureVector::raw_tf];
    if (ta != tb) return ta > tb;
    return a.second->surface < b.second->surface;
  });
  std::vector<std::string> out;
  for (const auto& s : scored) out.push_back(s.second->surface);
  return out;
}

// Leave-one-topic-out: one fold per topic, in topic-name order.
inline EvalReport cross_validate(std::vector<LabeledTopic> topics, const SvrHyperparams& hp = {}) {
  if (topics.size() < 2) throw Error("InsufficientTopics", "cross-validation needs at least two topics");
  std::sort(topics.begin(), topics.end(), [](const auto& a, const auto& b) { return a.topic < b.topic; });
  EvalReport report;
  for (std::size_t held = 0; held < topics.size(); ++held) {
    std::vector<TrainingExample> train_set;
    for (std::size_t t = 0; t < topics.size(); ++t)
      if (t != held) train_set.insert(train_set.end(), topics[t].examples.begin(), topics[t].examples.end());
    const RegressionModel model = train(train_set, hp);
    const auto ranking = rank_examples(model, topics[held].examples);
    std::map<std::string, double> gold;
    for (const auto& e : topics[held].examples) gold[e.surface] = e.gold_score;
    FoldResult fold{topics[held].topic, {}};
    for (std::size_t c = 0; c < kPrecisionCutoffs.size(); ++c)
      fold.precision[c] = precision_at_k(ranking, gold, kPrecisionCutoffs[c]);
    report.folds.push_back(fold);
  }
  for (std::size_t c = 0; c < kPrecisionCutoffs.size(); ++c) {
    double sum = 0;
    for (const auto& f : report.folds) sum += f.precision[c];
    report.macro[c] = sum / static_cast<double>(report.folds.size());
  }
  return report;
}

inline nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json folds = nlohmann::json::array();
  for (const auto& f : r.folds)
    folds.push_back({{"topic", f.topic}, {"p@5", f.precision[0]}, {"p@10", f.precision[1]}, {"p@20", f.precision[2]}});
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : r.methods)
    methods.push_back({{"method", m.method}, {"word_count", m.word_count}, {"redundancy", m.redundancy}});
  nlohmann::json j = {{"folds", folds}, {"methods", methods}};
  if (!r.folds.empty()) j["macro"] = {{"p@5", r.macro[0]}, {"p@10", r.macro[1]}, {"p@20", r.macro[2]}};
  return j;
}

inline std::string report_to_text(const EvalReport& r) {
  std::string out;
  char line[256];
  if (!r.folds.empty()) {
    std::snprintf(line, sizeof line, "%-28s %7s %7s %7s\n", "Topic", "P@5", "P@10", "P@20");
    out += line;
    for (const auto& f : r.folds) {
      std::snprintf(line, sizeof line, "%-28s %7.3f %7.3f %7.3f\n", f.topic.c_str(), f.precision[0], f.precision[1],
                    f.precision[2]);
      out += line;
    }
    std::snprintf(line, sizeof line, "%-28s %7.3f %7.3f %7.3f\n", "macro average", r.macro[0], r.macro[1], r.macro[2]);
    out += line;
  }
  if (!r.methods.empty()) {
    if (!out.empty()) out += "\n";
    const std::string rule = "+----------------+--------+--------+\n";
    out += rule;
    std::snprintf(line, sizeof line, "| %-14s | %6s | %6s |\n", "Method", "Words", "Redun.");
    out += line + rule;
    for (const auto& m : r.methods) {
      std::snprintf(line, sizeof line, "| %-14s | %6zu | %6.3f |\n", m.method.c_str(), m.word_count, m.redundancy);
      out += line + rule;
    }
  }
  return out;
}

}  // namespace newsynth
