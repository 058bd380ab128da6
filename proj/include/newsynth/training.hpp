#pragma once

// Gold-label files and their conversion into training examples.
//
// A gold line is {"topic", "label", "gold_score"} with an optional
// "features" array of 12 numbers. Lines without features are resolved
// against the topic's corpus: every candidate mined from that corpus becomes
// an example, scored by its gold line or 0 when unlisted.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsynth/baselines.hpp"
#include "newsynth/candidates.hpp"
#include "newsynth/features.hpp"
#include "newsynth/regression.hpp"
#include "newsynth/synth.hpp"

namespace newsynth {

struct GoldLine {
  std::string topic;
  std::string label;
  int gold_score = 0;
  std::optional<FeatureVector> features;
  std::size_t line = 0;
};

inline std::vector<GoldLine> load_gold(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  std::vector<GoldLine> out;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error&) {
      throw SchemaError(line_no, "<json>", "is not valid JSON");
    }
    GoldLine g;
    g.line = line_no;
    if (!j.is_object()) throw SchemaError(line_no, "<object>", "is not a JSON object");
    if (!j.contains("topic") || !j["topic"].is_string()) throw SchemaError(line_no, "topic");
    if (!j.contains("label") || !j["label"].is_string()) throw SchemaError(line_no, "label");
    if (!j.contains("gold_score") || !j["gold_score"].is_number_integer()) throw SchemaError(line_no, "gold_score");
    g.topic = j["topic"].get<std::string>();
    g.label = j["label"].get<std::string>();
    g.gold_score = j["gold_score"].get<int>();
    if (g.gold_score < 0 || g.gold_score > 3) throw SchemaError(line_no, "gold_score", "must be in 0..3");
    if (const auto f = j.find("features"); f != j.end()) {
      if (!f->is_array() || f->size() != FeatureVector::kSize) throw SchemaError(line_no, "features", "must hold 12 numbers");
      FeatureVector fv;
      for (std::size_t i = 0; i < FeatureVector::kSize; ++i) {
        if (!(*f)[i].is_number()) throw SchemaError(line_no, "features", "must hold 12 numbers");
        fv[i] = (*f)[i].get<double>();
      }
      g.features = fv;
    }
    out.push_back(std::move(g));
  }
  return out;
}

// `<dir>/<topic>.jsonl`, falling back to the topic with spaces as '_'.
inline std::filesystem::path corpus_path_for(const std::filesystem::path& dir, const std::string& topic) {
  auto direct = dir / (topic + ".jsonl");
  if (std::filesystem::exists(direct)) return direct;
  std::string slug = topic;
  for (auto& c : slug)
    if (c == ' ') c = '_';
  return dir / (slug + ".jsonl");
}

struct LabeledTopicsResult {
  std::vector<LabeledTopic> topics;
  std::vector<std::string> unmatched;  // "topic: label" gold lines not among the candidates
};

inline LabeledTopicsResult build_labeled_topics(const std::vector<GoldLine>& gold,
                                                const std::optional<std::string>& corpora_dir,
                                                const PipelineConfig& config = {}) {
  std::map<std::string, std::vector<const GoldLine*>> by_topic;
  for (const auto& g : gold) by_topic[g.topic].push_back(&g);

  LabeledTopicsResult result;
  for (const auto& [topic, lines] : by_topic) {
    LabeledTopic lt{topic, {}};
    const bool inline_features = std::all_of(lines.begin(), lines.end(), [](const GoldLine* g) { return g->features.has_value(); });
    if (inline_features) {
      for (const auto* g : lines) lt.examples.push_back({topic, g->label, *g->features, static_cast<double>(g->gold_score)});
    } else {
      if (!corpora_dir)
        throw Error("MissingCorpus", "gold lines for topic \"" + topic + "\" have no features; pass a corpora directory",
                    topic);
      const auto path = corpus_path_for(*corpora_dir, topic);
      const Corpus corpus = ingest_corpus(path.string(), topic, config.max_articles);
      auto candidates = extract_candidates(corpus, config.extraction);
      const FeatureContext ctx(corpus, fit_lda(corpus, config.lda));
      compute_all_features(candidates, ctx);
      std::map<std::string, double> scores;
      for (const auto* g : lines) scores[g->label] = g->gold_score;
      for (const auto& c : candidates) {
        const auto it = scores.find(c.surface);
        lt.examples.push_back({topic, c.surface, c.features, it == scores.end() ? 0.0 : it->second});
        if (it != scores.end()) scores.erase(it);
      }
      for (const auto& kv : scores) result.unmatched.push_back(topic + ": " + kv.first);
    }
    result.topics.push_back(std::move(lt));
  }
  return result;
}

inline std::vector<TrainingExample> flatten(const std::vector<LabeledTopic>& topics) {
  std::vector<TrainingExample> out;
  for (const auto& t : topics) out.insert(out.end(), t.examples.begin(), t.examples.end());
  return out;
}

}  // namespace newsynth
