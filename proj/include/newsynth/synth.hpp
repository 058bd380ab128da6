#pragma once

// Pipeline orchestration, the interactive session state machine and
// overview-article assembly/export.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsynth/candidates.hpp"
#include "newsynth/corpus.hpp"
#include "newsynth/error.hpp"
#include "newsynth/features.hpp"
#include "newsynth/lda.hpp"
#include "newsynth/merge.hpp"
#include "newsynth/rank.hpp"
#include "newsynth/regression.hpp"
#include "newsynth/segment.hpp"

namespace newsynth {

struct PipelineConfig {
  static constexpr int kVersion = 1;

  std::size_t max_articles = Corpus::kDefaultMaxArticles;
  ExtractionConfig extraction;
  MergeConfig merge;
  LdaConfig lda;
  std::size_t window = 2;
  double depth_cutoff = 0.5;
  RankConfig rank;
  std::size_t target_words = 1000;
  std::size_t default_section_count = 5;

  void validate() const {
    const auto fail = [](const std::string& what) { throw Error("InvalidConfig", "invalid config: " + what); };
    if (max_articles < 1) fail("max_articles must be >= 1");
    if (extraction.min_count_unigram < 1 || extraction.min_count_ngram < 1) fail("min counts must be >= 1");
    if (merge.top_k < 1) fail("top_k must be >= 1");
    if (merge.cos_threshold < 0 || merge.cos_threshold > 1) fail("cos_threshold must lie in [0,1]");
    if (window < 1) fail("window must be >= 1");
    if (depth_cutoff < -10 || depth_cutoff > 10) fail("depth_cutoff must lie in [-10,10]");
    if (rank.textrank.damping <= 0 || rank.textrank.damping >= 1) fail("damping must lie in (0,1)");
    if (rank.textrank.tol <= 0) fail("tol must be positive");
    if (rank.textrank.max_iter < 1) fail("max_iter must be >= 1");
    if (rank.mmr_lambda < 0 || rank.mmr_lambda > 1) fail("lambda must lie in [0,1]");
    if (target_words < 1) fail("target_words must be >= 1");
    if (default_section_count < 1) fail("default_section_count must be >= 1");
    if (lda.topics < 1 || lda.iterations < 0 || lda.alpha <= 0 || lda.beta <= 0) fail("lda parameters out of range");
  }

  SegmentConfig segment_config(const StopWords* stopwords = nullptr) const {
    return {window, depth_cutoff, stopwords};
  }
};

inline nlohmann::json config_to_json(const PipelineConfig& c) {
  return {{"version", PipelineConfig::kVersion},
          {"max_articles", c.max_articles},
          {"min_count_unigram", c.extraction.min_count_unigram},
          {"min_count_ngram", c.extraction.min_count_ngram},
          {"top_k", c.merge.top_k},
          {"cos_threshold", c.merge.cos_threshold},
          {"lda_topics", c.lda.topics},
          {"lda_iterations", c.lda.iterations},
          {"lda_alpha", c.lda.alpha},
          {"lda_beta", c.lda.beta},
          {"seed", c.lda.seed},
          {"window", c.window},
          {"depth_cutoff", c.depth_cutoff},
          {"damping", c.rank.textrank.damping},
          {"tol", c.rank.textrank.tol},
          {"max_iter", c.rank.textrank.max_iter},
          {"lambda", c.rank.mmr_lambda},
          {"target_words", c.target_words},
          {"default_section_count", c.default_section_count}};
}

// Missing keys keep their defaults; unknown keys are rejected.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig c = {}) {
  if (!j.is_object()) throw Error("InvalidConfig", "config must be a JSON object");
  if (const auto v = j.find("version"); v != j.end() && *v != PipelineConfig::kVersion)
    throw Error("InvalidConfig", "unsupported config version " + v->dump());
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "version") continue;
      else if (key == "max_articles") c.max_articles = value.get<std::size_t>();
      else if (key == "min_count_unigram") c.extraction.min_count_unigram = value.get<std::size_t>();
      else if (key == "min_count_ngram") c.extraction.min_count_ngram = value.get<std::size_t>();
      else if (key == "top_k") c.merge.top_k = value.get<std::size_t>();
      else if (key == "cos_threshold") c.merge.cos_threshold = value.get<double>();
      else if (key == "lda_topics") c.lda.topics = value.get<int>();
      else if (key == "lda_iterations") c.lda.iterations = value.get<int>();
      else if (key == "lda_alpha") c.lda.alpha = value.get<double>();
      else if (key == "lda_beta") c.lda.beta = value.get<double>();
      else if (key == "seed") c.lda.seed = value.get<std::uint64_t>();
      else if (key == "window") c.window = value.get<std::size_t>();
      else if (key == "depth_cutoff") c.depth_cutoff = value.get<double>();
      else if (key == "damping") c.rank.textrank.damping = value.get<double>();
      else if (key == "tol") c.rank.textrank.tol = value.get<double>();
      else if (key == "max_iter") c.rank.textrank.max_iter = value.get<int>();
      else if (key == "lambda") c.rank.mmr_lambda = value.get<double>();
      else if (key == "target_words") c.target_words = value.get<std::size_t>();
      else if (key == "default_section_count") c.default_section_count = value.get<std::size_t>();
      else throw Error("InvalidConfig", "unknown config key: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("InvalidConfig", std::string("config value has the wrong type: ") + e.what());
  }
  c.validate();
  return c;
}

inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFound(path);
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("InvalidConfig", "config file is not valid JSON: " + path, e.what());
  }
}

enum class Stage { labels_ready, blocks_ready, synthesized };

inline std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::labels_ready: return "LABELS_READY";
    case Stage::blocks_ready: return "BLOCKS_READY";
    case Stage::synthesized: return "SYNTHESIZED";
  }
  return "LABELS_READY";
}

inline Stage parse_stage(std::string_view s) {
  if (s == "LABELS_READY") return Stage::labels_ready;
  if (s == "BLOCKS_READY") return Stage::blocks_ready;
  if (s == "SYNTHESIZED") return Stage::synthesized;
  throw Error("SessionFormat", "unknown stage: " + std::string(s));
}

struct LabelEntry {
  SubtopicLabel label;
  std::vector<RankedBlock> ranked;  // MMR order
  bool user_added = false;
};

struct BlockChoice {
  std::vector<std::string> block_ids;
  std::map<std::string, std::string> edits;
};

struct Paragraph {
  std::string text;
  bool edited = false;
  std::string block_id;
  std::string article_id;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Paragraph&, const Paragraph&) = default;
};

struct SubtopicSection {
  std::string label;  // subtitle; empty for untitled baseline output
  std::vector<Paragraph> paragraphs;

  friend bool operator==(const SubtopicSection&, const SubtopicSection&) = default;
};

struct SynthesisArticle {
  std::string topic_name;
  std::vector<SubtopicSection> sections;
  std::size_t word_count = 0;

  friend bool operator==(const SynthesisArticle&, const SynthesisArticle&) = default;
};

struct Session {
  std::string id;
  Corpus corpus;
  PipelineConfig config;
  Stage stage = Stage::labels_ready;
  std::vector<TextBlock> blocks;
  std::vector<LabelEntry> labels;  // descending score
  std::vector<std::string> chosen_labels;
  std::map<std::string, BlockChoice> block_choices;
  std::optional<SynthesisArticle> article;
  std::string final_draft;
  std::int64_t created_at = 0;
  std::int64_t updated_at = 0;

  const LabelEntry* find_label(std::string_view surface) const {
    for (const auto& l : labels)
      if (l.label.surface == surface) return &l;
    return nullptr;
  }

  const TextBlock* find_block(std::string_view block_id) const {
    for (const auto& b : blocks)
      if (b.block_id == block_id) return &b;
    return nullptr;
  }

  void touch(std::int64_t now) { updated_at = std::max(now, updated_at + 1); }
};

// Extraction, scoring and merging of labels for one corpus.
inline std::vector<SubtopicLabel> find_subtopics(const Corpus& corpus, const RegressionModel& model,
                                                 const PipelineConfig& config) {
  auto candidates = extract_candidates(corpus, config.extraction);
  if (candidates.empty()) {
    throw Error("NoCandidates",
                "no candidate labels: corpus too small for min_count_unigram=" +
                    std::to_string(config.extraction.min_count_unigram) +
                    " / min_count_ngram=" + std::to_string(config.extraction.min_count_ngram),
                nlohmann::json{{"min_count_unigram", config.extraction.min_count_unigram},
                               {"min_count_ngram", config.extraction.min_count_ngram},
                               {"articles", corpus.articles.size()}}
                    .dump());
  }
  const FeatureContext ctx(corpus, fit_lda(corpus, config.lda));
  compute_all_features(candidates, ctx);
  predict_scores(model, candidates);
  return merge_labels(candidates, corpus, config.merge);
}

inline Session run_pipeline(Corpus corpus, const RegressionModel& model, const PipelineConfig& config,
                            std::string session_id = {}, std::int64_t now = 0) {
  config.validate();
  Session s;
  s.id = std::move(session_id);
  s.config = config;
  s.created_at = s.updated_at = now;
  auto labels = find_subtopics(corpus, model, config);
  s.blocks = segment_corpus(corpus, config.segment_config());
  for (auto& l : labels) {
    auto ranked = rank_label_blocks(s.blocks, l.tokens, corpus, config.rank);
    s.labels.push_back({std::move(l), std::move(ranked), false});
  }
  s.corpus = std::move(corpus);
  return s;
}

namespace detail {

[[noreturn]] inline void stage_violation(const Session& s, const std::string& action) {
  throw Error("StageViolation", "cannot " + action + " at stage " + std::string(stage_name(s.stage)),
              std::string(stage_name(s.stage)));
}

inline void require_selectable(const Session& s, const std::string& action) {
  if (s.stage == Stage::synthesized) stage_violation(s, action);
}

}  // namespace detail

// Adds a user-defined label; its candidates come from the same exact-match
// ranking as the mined labels.
inline void add_label(Session& s, const std::string& label_text, std::int64_t now = 0) {
  detail::require_selectable(s, "add labels");
  auto tokens = fallback_tokenize(label_text);
  if (tokens.empty()) throw Error("InvalidLabel", "label text has no tokens");
  const std::string surface = surface_of(tokens);
  if (s.find_label(surface)) throw Error("DuplicateLabel", "label already exists: " + surface, surface);
  SubtopicLabel l{tokens, surface, 0.0, corpus_count(s.corpus, tokens), {surface}};
  auto ranked = rank_label_blocks(s.blocks, tokens, s.corpus, s.config.rank);
  s.labels.push_back({std::move(l), std::move(ranked), true});
  s.touch(now);
}

inline void choose_labels(Session& s, const std::vector<std::string>& ordered, std::int64_t now = 0) {
  detail::require_selectable(s, "choose labels");
  if (ordered.empty()) throw Error("EmptySelection", "choose at least one label");
  std::set<std::string> seen;
  for (const auto& l : ordered) {
    if (!s.find_label(l)) throw Error("UnknownLabel", "unknown label: " + l, l);
    if (!seen.insert(l).second) throw Error("DuplicateLabel", "label chosen twice: " + l, l);
  }
  s.chosen_labels = ordered;
  s.stage = Stage::blocks_ready;
  s.touch(now);
}

// Overrides the default blocks of one label. With `force`, any block of the
// corpus may be used, not only the label's exact-match candidates.
inline void choose_blocks(Session& s, const std::string& label, const std::vector<std::string>& block_ids,
                          const std::map<std::string, std::string>& edits, bool force = false,
                          std::int64_t now = 0) {
  detail::require_selectable(s, "choose blocks");
  const LabelEntry* entry = s.find_label(label);
  if (!entry) throw Error("UnknownLabel", "unknown label: " + label, label);
  std::set<std::string> seen;
  for (const auto& id : block_ids) {
    const bool candidate = std::any_of(entry->ranked.begin(), entry->ranked.end(),
                                       [&](const RankedBlock& r) { return r.block.block_id == id; });
    if (!candidate && !(force && s.find_block(id))) throw Error("UnknownBlock", "unknown block for label: " + id, id);
    if (!seen.insert(id).second) throw Error("DuplicateBlock", "block chosen twice: " + id, id);
  }
  for (const auto& kv : edits)
    if (!seen.contains(kv.first))
      throw Error("EditWithoutSelection", "edit for a block that is not chosen: " + kv.first, kv.first);
  s.block_choices[label] = {block_ids, edits};
  s.stage = Stage::blocks_ready;
  s.touch(now);
}

// Clears all user choices and the synthesized article.
inline void reset(Session& s, std::int64_t now = 0) {
  s.chosen_labels.clear();
  s.block_choices.clear();
  s.article.reset();
  s.final_draft.clear();
  s.stage = Stage::labels_ready;
  s.touch(now);
}

inline std::string render_markdown(const SynthesisArticle& a) {
  std::string out = "# " + a.topic_name + "\n";
  for (const auto& sec : a.sections) {
    if (!sec.label.empty()) out += "\n## " + sec.label + "\n";
    for (const auto& p : sec.paragraphs) out += "\n" + p.text + "\n";
  }
  return out;
}

inline nlohmann::json article_to_json(const SynthesisArticle& a) {
  nlohmann::json sections = nlohmann::json::array();
  for (const auto& sec : a.sections) {
    nlohmann::json paras = nlohmann::json::array();
    for (const auto& p : sec.paragraphs)
      paras.push_back({{"text", p.text},
                       {"edited", p.edited},
                       {"block_id", p.block_id},
                       {"article_id", p.article_id},
                       {"sentence_range", {p.start, p.end}}});
    sections.push_back({{"label", sec.label}, {"paragraphs", std::move(paras)}});
  }
  return {{"topic_name", a.topic_name}, {"sections", std::move(sections)}, {"word_count", a.word_count}};
}

inline SynthesisArticle article_from_json(const nlohmann::json& j) {
  SynthesisArticle a;
  a.topic_name = j.at("topic_name").get<std::string>();
  a.word_count = j.at("word_count").get<std::size_t>();
  for (const auto& sj : j.at("sections")) {
    SubtopicSection sec;
    sec.label = sj.at("label").get<std::string>();
    for (const auto& pj : sj.at("paragraphs")) {
      Paragraph p;
      p.text = pj.at("text").get<std::string>();
      p.edited = pj.at("edited").get<bool>();
      p.block_id = pj.at("block_id").get<std::string>();
      p.article_id = pj.at("article_id").get<std::string>();
      p.start = pj.at("sentence_range").at(0).get<std::size_t>();
      p.end = pj.at("sentence_range").at(1).get<std::size_t>();
      sec.paragraphs.push_back(std::move(p));
    }
    a.sections.push_back(std::move(sec));
  }
  return a;
}

inline Paragraph make_paragraph(const Corpus& corpus, const TextBlock& b) {
  return {block_text(corpus, b), false, b.block_id, b.article_id, b.start, b.end};
}

inline std::size_t article_word_count(const SynthesisArticle& a) {
  std::size_t n = 0;
  for (const auto& sec : a.sections)
    for (const auto& p : sec.paragraphs) n += text::word_count(p.text);
  return n;
}

// Builds the article from the session's choices, falling back to the top
// default_section_count labels and, per label, top MMR blocks until the
// per-section word budget is reached.
inline SynthesisArticle synthesize(Session& s, std::int64_t now = 0) {
  std::vector<const LabelEntry*> chosen;
  if (!s.chosen_labels.empty()) {
    for (const auto& l : s.chosen_labels) chosen.push_back(s.find_label(l));
  } else {
    for (std::size_t i = 0; i < s.labels.size() && chosen.size() < s.config.default_section_count; ++i)
      if (!s.labels[i].user_added) chosen.push_back(&s.labels[i]);
  }
  if (chosen.empty()) throw Error("NoCandidates", "session has no labels to synthesize");

  const std::size_t budget = std::max<std::size_t>(1, s.config.target_words / chosen.size());
  SynthesisArticle article;
  article.topic_name = s.corpus.topic_name;
  std::set<std::string> used;

  for (const LabelEntry* entry : chosen) {
    const std::string& surface = entry->label.surface;
    SubtopicSection section;
    section.label = surface;
    if (const auto choice = s.block_choices.find(surface); choice != s.block_choices.end()) {
      if (choice->second.block_ids.empty())
        throw Error("EmptySection", "no blocks chosen for label: " + surface, surface);
      for (const auto& id : choice->second.block_ids) {
        Paragraph p = make_paragraph(s.corpus, *s.find_block(id));
        if (const auto e = choice->second.edits.find(id); e != choice->second.edits.end()) {
          p.text = e->second;
          p.edited = true;
        }
        section.paragraphs.push_back(std::move(p));
        used.insert(id);
      }
    } else {
      if (entry->ranked.empty())
        throw Error("EmptySection", "label has no candidate blocks: " + surface, surface);
      std::vector<TextBlock> picked;
      std::size_t words = 0;
      for (const auto& r : entry->ranked) {
        if (words >= budget) break;
        if (used.contains(r.block.block_id)) continue;
        picked.push_back(r.block);
        words += text::word_count(block_text(s.corpus, r.block));
      }
      if (picked.empty()) picked.push_back(entry->ranked.front().block);
      for (const auto& b : order_blocks(std::move(picked))) {
        section.paragraphs.push_back(make_paragraph(s.corpus, b));
        used.insert(b.block_id);
      }
    }
    article.sections.push_back(std::move(section));
  }
  article.word_count = article_word_count(article);

  s.article = article;
  s.final_draft = render_markdown(article);
  s.stage = Stage::synthesized;
  s.touch(now);
  return article;
}

inline void edit_final(Session& s, std::string draft, std::int64_t now = 0) {
  if (s.stage != Stage::synthesized) throw Error("NotSynthesized", "synthesize before editing the draft");
  s.final_draft = std::move(draft);
  s.touch(now);
}

inline std::string export_markdown(const Session& s) {
  if (s.stage != Stage::synthesized) throw Error("NotSynthesized", "nothing to export before synthesis");
  return s.final_draft;
}

inline nlohmann::json export_json(const Session& s) {
  if (s.stage != Stage::synthesized || !s.article) throw Error("NotSynthesized", "nothing to export before synthesis");
  auto j = article_to_json(*s.article);
  j["draft"] = s.final_draft;
  return j;
}

// Full session state, including its corpus, for persistence.
inline nlohmann::json session_to_json(const Session& s) {
  using nlohmann::json;
  const auto block_json = [](const TextBlock& b) {
    return json{{"article_id", b.article_id}, {"start", b.start}, {"end", b.end},
                {"published_at", b.published_at}, {"block_id", b.block_id}};
  };
  const auto tokens_json = [](const std::vector<Token>& toks) {
    json arr = json::array();
    for (const auto& t : toks) arr.push_back({t.text, pos_name(t.pos)});
    return arr;
  };
  json blocks = json::array();
  for (const auto& b : s.blocks) blocks.push_back(block_json(b));
  json labels = json::array();
  for (const auto& l : s.labels) {
    json ranked = json::array();
    for (const auto& r : l.ranked) ranked.push_back({{"block", block_json(r.block)}, {"ws", r.ws}, {"mmr_rank", r.mmr_rank}});
    labels.push_back({{"surface", l.label.surface},
                      {"tokens", tokens_json(l.label.tokens)},
                      {"score", l.label.score},
                      {"tf", l.label.tf},
                      {"merged_from", l.label.merged_from},
                      {"user_added", l.user_added},
                      {"ranked", std::move(ranked)}});
  }
  json choices = json::object();
  for (const auto& [label, c] : s.block_choices) choices[label] = {{"block_ids", c.block_ids}, {"edits", c.edits}};
  return {{"id", s.id},
          {"stage", stage_name(s.stage)},
          {"corpus", corpus_to_json(s.corpus)},
          {"config", config_to_json(s.config)},
          {"blocks", std::move(blocks)},
          {"labels", std::move(labels)},
          {"chosen_labels", s.chosen_labels},
          {"block_choices", std::move(choices)},
          {"article", s.article ? article_to_json(*s.article) : json(nullptr)},
          {"final_draft", s.final_draft},
          {"created_at", s.created_at},
          {"updated_at", s.updated_at}};
}

inline Session session_from_json(const nlohmann::json& j) {
  const auto block_from = [](const nlohmann::json& b) {
    return TextBlock{b.at("article_id").get<std::string>(), b.at("start").get<std::size_t>(),
                     b.at("end").get<std::size_t>(), b.at("published_at").get<std::int64_t>(),
                     b.at("block_id").get<std::string>()};
  };
  try {
    Session s;
    s.id = j.at("id").get<std::string>();
    s.stage = parse_stage(j.at("stage").get<std::string>());
    s.corpus = corpus_from_serialized(j.at("corpus"));
    s.config = config_from_json(j.at("config"));
    for (const auto& b : j.at("blocks")) s.blocks.push_back(block_from(b));
    for (const auto& lj : j.at("labels")) {
      LabelEntry e;
      e.label.surface = lj.at("surface").get<std::string>();
      for (const auto& t : lj.at("tokens"))
        e.label.tokens.emplace_back(t.at(0).get<std::string>(), parse_pos(t.at(1).get<std::string>()));
      e.label.score = lj.at("score").get<double>();
      e.label.tf = lj.at("tf").get<std::size_t>();
      e.label.merged_from = lj.at("merged_from").get<std::vector<std::string>>();
      e.user_added = lj.at("user_added").get<bool>();
      for (const auto& r : lj.at("ranked"))
        e.ranked.push_back({block_from(r.at("block")), r.at("ws").get<double>(), r.at("mmr_rank").get<std::size_t>()});
      s.labels.push_back(std::move(e));
    }
    s.chosen_labels = j.at("chosen_labels").get<std::vector<std::string>>();
    for (const auto& [label, c] : j.at("block_choices").items())
      s.block_choices[label] = {c.at("block_ids").get<std::vector<std::string>>(),
                                c.at("edits").get<std::map<std::string, std::string>>()};
    if (!j.at("article").is_null()) s.article = article_from_json(j.at("article"));
    s.final_draft = j.at("final_draft").get<std::string>();
    s.created_at = j.at("created_at").get<std::int64_t>();
    s.updated_at = j.at("updated_at").get<std::int64_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error("SessionFormat", std::string("malformed session record: ") + e.what());
  }
}

}  // namespace newsynth
