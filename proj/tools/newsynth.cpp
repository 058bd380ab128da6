// newsynth: one-shot synthesis, model training, evaluation, inspection and
// the interactive HTTP service.
//
// Exit codes: 0 ok, 2 usage, 3 data (unreadable/invalid input files),
// 4 pipeline (e.g. no candidate labels).

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "newsynth/baselines.hpp"
#include "newsynth/corpus.hpp"
#include "newsynth/regression.hpp"
#include "newsynth/segment.hpp"
#include "newsynth/service.hpp"
#include "newsynth/store.hpp"
#include "newsynth/synth.hpp"
#include "newsynth/training.hpp"

namespace {

using namespace newsynth;
using nlohmann::json;

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitPipeline = 4;

int exit_code_for(const Error& e) {
  static const std::set<std::string> data_errors = {"FileNotFound", "SchemaError",   "EmptyCorpus", "ModelFormat",
                                                    "InvalidConfig", "MissingCorpus", "IoError",    "DegenerateData",
                                                    "InsufficientTopics"};
  return data_errors.contains(e.code()) ? kExitData : kExitPipeline;
}

struct Common {
  bool json_out = false;
};

void emit(const Common& common, const json& j, const std::string& human) {
  if (common.json_out) {
    std::cout << j.dump() << "\n";
  } else {
    std::cout << human;
  }
}

std::string topic_or_stem(const std::optional<std::string>& topic, const std::string& corpus_path) {
  return topic ? *topic : topic_from_path(corpus_path);
}

PipelineConfig config_or_default(const std::optional<std::string>& path) {
  return path ? load_config(*path) : PipelineConfig{};
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot write " + path, path);
  out << data;
}

struct SynthArgs {
  std::string corpus, model;
  std::optional<std::string> config, topic;
  std::string out = "synthesis.md";
};

int run_synth(const SynthArgs& a, const Common& common) {
  const PipelineConfig config = config_or_default(a.config);
  const RegressionModel model = load_model(a.model);
  Corpus corpus = ingest_corpus(a.corpus, topic_or_stem(a.topic, a.corpus), config.max_articles);
  Session session = run_pipeline(std::move(corpus), model, config, "cli");
  const SynthesisArticle article = synthesize(session);

  const std::filesystem::path md(a.out);
  std::filesystem::path sidecar = md;
  sidecar.replace_extension(".json");
  write_file(md.string(), export_markdown(session));
  json provenance = export_json(session);
  nlohmann::json labels = json::array();
  for (const auto& l : session.labels) labels.push_back({{"label", l.label.surface}, {"score", l.label.score}});
  provenance["labels"] = labels;
  write_file(sidecar.string(), provenance.dump(2) + "\n");

  emit(common,
       {{"event", "synthesized"}, {"out", md.string()}, {"provenance", sidecar.string()},
        {"sections", article.sections.size()}, {"word_count", article.word_count}, {"labels", session.labels.size()}},
       "wrote " + md.string() + " (" + std::to_string(article.sections.size()) + " sections, " +
           std::to_string(article.word_count) + " words) and " + sidecar.string() + "\n");
  return 0;
}

struct TrainArgs {
  std::string data, out;
  std::optional<std::string> corpora, config;
  SvrHyperparams hp;
};

int run_train(const TrainArgs& a, const Common& common) {
  const auto gold = load_gold(a.data);
  const auto labeled = build_labeled_topics(gold, a.corpora, config_or_default(a.config));
  for (const auto& u : labeled.unmatched) std::cerr << "warning: gold label is not a candidate: " << u << "\n";
  const auto examples = flatten(labeled.topics);
  const RegressionModel model = train(examples, a.hp);
  save_model(model, a.out);

  std::string human = "trained on " + std::to_string(examples.size()) + " examples -> " + a.out + "\n";
  char line[128];
  for (std::size_t j = 0; j < FeatureVector::kSize; ++j) {
    std::snprintf(line, sizeof line, "  %-22s %+.6f\n", std::string(FeatureVector::names[j]).c_str(), model.weights[j]);
    human += line;
    if (common.json_out)
      std::cout << json{{"feature", FeatureVector::names[j]}, {"weight", model.weights[j]}}.dump() << "\n";
  }
  std::snprintf(line, sizeof line, "  %-22s %+.6f\n", "bias", model.bias);
  human += line;
  emit(common, {{"event", "trained"}, {"examples", examples.size()}, {"out", a.out}, {"bias", model.bias}}, human);
  return 0;
}

struct EvalArgs {
  std::string data;
  std::string folds = "loo";
  std::optional<std::string> corpora, config;
  SvrHyperparams hp;
};

int run_eval(const EvalArgs& a, const Common& common) {
  if (a.folds != "loo") throw Error("InvalidArgument", "only --folds loo is supported");
  const auto gold = load_gold(a.data);
  const auto labeled = build_labeled_topics(gold, a.corpora, config_or_default(a.config));
  const EvalReport report = cross_validate(labeled.topics, a.hp);
  if (common.json_out) {
    for (const auto& f : report.folds)
      std::cout << json{{"topic", f.topic}, {"p@5", f.precision[0]}, {"p@10", f.precision[1]}, {"p@20", f.precision[2]}}.dump()
                << "\n";
    std::cout << json{{"macro", {{"p@5", report.macro[0]}, {"p@10", report.macro[1]}, {"p@20", report.macro[2]}}}}.dump()
              << "\n";
  } else {
    std::cout << report_to_text(report);
  }
  return 0;
}

struct BaselineArgs {
  std::string corpus;
  std::optional<std::string> model, config, topic, report;
  std::optional<std::size_t> target_words;
};

int run_baselines(const BaselineArgs& a, const Common& common) {
  PipelineConfig config = config_or_default(a.config);
  if (a.target_words) config.target_words = *a.target_words;
  const Corpus corpus = ingest_corpus(a.corpus, topic_or_stem(a.topic, a.corpus), config.max_articles);
  EvalReport report;
  for (const auto& spec : all_baselines()) {
    const auto r = baseline_summarize(spec, corpus, config.target_words, config.segment_config(), config.rank.textrank);
    report.methods.push_back({spec.name(), r.article.word_count, r.redundancy});
  }
  if (a.model) {
    Session s = run_pipeline(corpus, load_model(*a.model), config, "baselines");
    const auto article = synthesize(s);
    std::vector<SummaryUnit> units;
    std::vector<std::size_t> idx;
    for (const auto& sec : article.sections)
      for (const auto& p : sec.paragraphs) {
        const TextBlock b{p.article_id, p.start, p.end, 0, p.block_id};
        units.push_back({b, p.text, term_vector(block_sentences(corpus, b)), 0});
        idx.push_back(idx.size());
      }
    report.methods.push_back({"Synthesis", article.word_count, redundancy(units, idx)});
  }
  if (a.report) write_file(*a.report, report_to_json(report).dump(2) + "\n");
  if (common.json_out) {
    for (const auto& m : report.methods)
      std::cout << json{{"method", m.method}, {"word_count", m.word_count}, {"redundancy", m.redundancy}}.dump() << "\n";
  } else {
    std::cout << report_to_text(report);
  }
  return 0;
}

struct SegmentArgs {
  std::string corpus;
  std::optional<std::string> topic, stopwords;
  std::size_t window = 2;
  double cutoff = 0.5;
};

int run_segment(const SegmentArgs& a, const Common& common) {
  const Corpus corpus = ingest_corpus(a.corpus, topic_or_stem(a.topic, a.corpus));
  std::optional<StopWords> stop;
  if (a.stopwords) stop = load_stopwords(*a.stopwords);
  const SegmentConfig cfg{a.window, a.cutoff, stop ? &*stop : nullptr};
  std::size_t sentences = 0;
  std::size_t blocks = 0;
  for (const auto& article : corpus.articles) {
    const auto bs = segment_article(article, cfg);
    json ranges = json::array();
    std::string human = article.id + ":";
    for (const auto& b : bs) {
      ranges.push_back({b.start, b.end});
      human += " [" + std::to_string(b.start) + "," + std::to_string(b.end) + ")";
    }
    sentences += article.body.size();
    blocks += bs.size();
    emit(common, {{"article_id", article.id}, {"blocks", ranges}}, human + "\n");
  }
  const double mean = blocks ? static_cast<double>(sentences) / static_cast<double>(blocks) : 0.0;
  char line[128];
  std::snprintf(line, sizeof line, "%zu articles, %zu blocks, %.3f sentences per block\n", corpus.articles.size(),
                blocks, mean);
  emit(common, {{"articles", corpus.articles.size()}, {"blocks", blocks}, {"mean_block_length", mean}}, line);
  return 0;
}

struct CandidateArgs {
  std::string corpus;
  std::optional<std::string> topic, model, config;
};

int run_candidates(const CandidateArgs& a, const Common&) {
  const PipelineConfig config = config_or_default(a.config);
  const Corpus corpus = ingest_corpus(a.corpus, topic_or_stem(a.topic, a.corpus), config.max_articles);
  auto candidates = extract_candidates(corpus, config.extraction);
  const FeatureContext ctx(corpus, fit_lda(corpus, config.lda));
  compute_all_features(candidates, ctx);
  if (a.model) predict_scores(load_model(*a.model), candidates);
  for (const auto& c : candidates) {
    json j = {{"topic", corpus.topic_name}, {"label", c.surface}, {"tf", c.tf}, {"features", c.features.values}};
    if (a.model) j["score"] = c.predicted_score;
    std::cout << j.dump() << "\n";
  }
  return 0;
}

struct ServeArgs {
  std::string store, model, host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> config;
  int workers = 2;
};

int run_serve(const ServeArgs& a, const Common&) {
  SessionStore store(a.store, load_model(a.model), config_or_default(a.config));
  Service service(store, a.workers);
  httplib::Server server;
  service.bind(server);
  const int port = a.port == 0 ? server.bind_to_any_port(a.host) : (server.bind_to_port(a.host, a.port) ? a.port : -1);
  if (port < 0) throw Error("IoError", "cannot bind " + a.host + ":" + std::to_string(a.port));
  std::cout << json{{"event", "listening"}, {"host", a.host}, {"port", port}}.dump() << std::endl;
  return server.listen_after_bind() ? 0 : kExitPipeline;
}

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-document news synthesis: mine subtopic labels, rank text blocks, assemble overview articles."};
  app.require_subcommand(1);
  Common common;
  app.add_flag("--json", common.json_out, "Machine-readable JSON lines on stdout");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "One-click synthesis of a corpus into a Markdown article");
  synth_cmd->add_option("--corpus", synth_args.corpus, "JSONL corpus")->required();
  synth_cmd->add_option("--model", synth_args.model, "Label model JSON")->required();
  synth_cmd->add_option("--config", synth_args.config, "Pipeline config JSON");
  synth_cmd->add_option("--topic", synth_args.topic, "Topic name (default: corpus file stem, '_' read as space)");
  synth_cmd->add_option("--out", synth_args.out, "Markdown output; provenance goes next to it as .json");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train the label scorer from gold labels");
  train_cmd->add_option("--data", train_args.data, "Gold label JSONL")->required();
  train_cmd->add_option("--out", train_args.out, "Model output path")->required();
  train_cmd->add_option("--corpora", train_args.corpora, "Directory of <topic>.jsonl corpora for feature extraction");
  train_cmd->add_option("--config", train_args.config, "Pipeline config JSON (extraction and LDA settings)");
  train_cmd->add_option("--seed", train_args.hp.seed, "Shuffle seed");
  train_cmd->add_option("--epsilon", train_args.hp.epsilon, "Insensitive-tube width");
  train_cmd->add_option("--C", train_args.hp.C, "Regularization constant");
  train_cmd->add_option("--epochs", train_args.hp.epochs, "Training epochs");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Leave-one-topic-out P@5/P@10/P@20 of the label scorer");
  eval_cmd->add_option("--data", eval_args.data, "Gold label JSONL")->required();
  eval_cmd->add_option("--folds", eval_args.folds, "Fold scheme (loo)");
  eval_cmd->add_option("--corpora", eval_args.corpora, "Directory of <topic>.jsonl corpora");
  eval_cmd->add_option("--config", eval_args.config, "Pipeline config JSON");
  eval_cmd->add_option("--seed", eval_args.hp.seed, "Shuffle seed");

  BaselineArgs base_args;
  auto* base_cmd = app.add_subcommand("baselines", "Run the comparison summarizers and print their report");
  base_cmd->add_option("--corpus", base_args.corpus, "JSONL corpus")->required();
  base_cmd->add_option("--model", base_args.model, "Also run the synthesizer with this label model");
  base_cmd->add_option("--config", base_args.config, "Pipeline config JSON");
  base_cmd->add_option("--topic", base_args.topic, "Topic name");
  base_cmd->add_option("--target-words", base_args.target_words, "Word budget (default 1000)");
  base_cmd->add_option("--report", base_args.report, "Also write the JSON report here");

  SegmentArgs seg_args;
  auto* seg_cmd = app.add_subcommand("segment", "Inspect text-block segmentation");
  seg_cmd->add_option("--corpus", seg_args.corpus, "JSONL corpus")->required();
  seg_cmd->add_option("--topic", seg_args.topic, "Topic name");
  seg_cmd->add_option("--window", seg_args.window, "Sentences per comparison window");
  seg_cmd->add_option("--cutoff", seg_args.cutoff, "Depth cutoff in stddevs above the mean");
  seg_cmd->add_option("--stopwords", seg_args.stopwords, "Stopword file, one token per line");

  CandidateArgs cand_args;
  auto* cand_cmd = app.add_subcommand("candidates", "Dump candidate labels with features as JSON lines");
  cand_cmd->add_option("--corpus", cand_args.corpus, "JSONL corpus")->required();
  cand_cmd->add_option("--topic", cand_args.topic, "Topic name");
  cand_cmd->add_option("--model", cand_args.model, "Score candidates with this model");
  cand_cmd->add_option("--config", cand_args.config, "Pipeline config JSON");

  ServeArgs serve_args;
  serve_args.store = env_or("NEWSYNTH_STORE", "");
  serve_args.model = env_or("NEWSYNTH_MODEL", "");
  auto* serve_cmd = app.add_subcommand("serve", "Run the session HTTP API under /v1");
  serve_cmd->add_option("--store", serve_args.store, "Session store directory (env NEWSYNTH_STORE)");
  serve_cmd->add_option("--model", serve_args.model, "Label model JSON (env NEWSYNTH_MODEL)");
  serve_cmd->add_option("--port", serve_args.port, "Port; 0 picks a free one");
  serve_cmd->add_option("--host", serve_args.host, "Bind address");
  serve_cmd->add_option("--config", serve_args.config, "Default pipeline config JSON");
  serve_cmd->add_option("--workers", serve_args.workers, "Concurrent pipeline runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth_cmd) return run_synth(synth_args, common);
    if (*train_cmd) return run_train(train_args, common);
    if (*eval_cmd) return run_eval(eval_args, common);
    if (*base_cmd) return run_baselines(base_args, common);
    if (*seg_cmd) return run_segment(seg_args, common);
    if (*cand_cmd) return run_candidates(cand_args, common);
    if (*serve_cmd) {
      if (serve_args.store.empty() || serve_args.model.empty()) {
        std::cerr << "serve: --store and --model (or NEWSYNTH_STORE / NEWSYNTH_MODEL) are required\n";
        return kExitUsage;
      }
      return run_serve(serve_args, common);
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.code() << "]: " << e.what() << "\n";
    if (common.json_out) std::cout << json{{"error", e.code()}, {"message", e.what()}, {"detail", e.detail()}}.dump() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPipeline;
  }
  return kExitUsage;
}
