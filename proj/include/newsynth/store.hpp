#pragma once

// File-backed session store.
//
// Layout under the root directory:
//   sessions/<id>.json   {"revision": n, "session": {...}}, replaced atomically
//   journal.jsonl        one committed mutation per line, fsync'd before the
//                        session file is rewritten
//
// On open every session file is loaded and journal entries newer than a
// session's revision are re-applied, so a crash between the journal append
// and the file rename loses nothing.

#include <fcntl.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "newsynth/error.hpp"
#include "newsynth/regression.hpp"
#include "newsynth/synth.hpp"

namespace newsynth {

namespace fs = std::filesystem;

inline std::int64_t wall_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

namespace detail {

inline void write_all(int fd, const std::string& data, const fs::path& path) {
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) throw Error("IoError", "write failed: " + path.string(), path.string());
    done += static_cast<std::size_t>(n);
  }
}

// Writes `data` to a sibling temp file, fsyncs it and renames it over `path`.
inline void atomic_write(const fs::path& path, const std::string& data) {
  const fs::path tmp = path.string() + ".tmp";
  const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw Error("IoError", "cannot create " + tmp.string(), tmp.string());
  try {
    write_all(fd, data, tmp);
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::fsync(fd);
  ::close(fd);
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("IoError", "cannot rename " + tmp.string() + ": " + ec.message(), path.string());
  const int dir = ::open(path.parent_path().c_str(), O_RDONLY);
  if (dir >= 0) {
    ::fsync(dir);
    ::close(dir);
  }
}

inline std::string random_token_128() {
  static std::mutex m;
  static std::random_device rd;
  std::lock_guard<std::mutex> lock(m);
  std::string out;
  char buf[9];
  for (int i = 0; i < 4; ++i) {
    std::snprintf(buf, sizeof buf, "%08x", static_cast<unsigned>(rd()));
    out += buf;
  }
  return out;
}

}  // namespace detail

// How a session is (re)built from a create request.
struct CreateRequest {
  std::optional<std::string> corpus_path;
  std::optional<nlohmann::json> corpus;  // inline array of article objects
  std::string topic_name;
  std::optional<std::size_t> max_articles;
  nlohmann::json config = nlohmann::json::object();

  nlohmann::json to_json() const {
    nlohmann::json j = {{"topic_name", topic_name}, {"config", config}};
    if (corpus_path) j["corpus_path"] = *corpus_path;
    if (corpus) j["corpus"] = *corpus;
    if (max_articles) j["max_articles"] = *max_articles;
    return j;
  }

  // Throws SchemaError for malformed requests.
  static CreateRequest from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError(0, "<body>", "must be a JSON object");
    CreateRequest r;
    if (const auto p = j.find("corpus_path"); p != j.end()) {
      if (!p->is_string()) throw SchemaError(0, "corpus_path");
      r.corpus_path = p->get<std::string>();
    }
    if (const auto c = j.find("corpus"); c != j.end()) {
      if (!c->is_array()) throw SchemaError(0, "corpus", "must be an array of articles");
      r.corpus = *c;
    }
    if (r.corpus_path.has_value() == r.corpus.has_value())
      throw SchemaError(0, "corpus", "give exactly one of corpus_path or corpus");
    if (const auto t = j.find("topic_name"); t != j.end()) {
      if (!t->is_string()) throw SchemaError(0, "topic_name");
      r.topic_name = t->get<std::string>();
    } else if (r.corpus_path) {
      r.topic_name = topic_from_path(*r.corpus_path);
    } else {
      throw SchemaError(0, "topic_name");
    }
    if (const auto m = j.find("max_articles"); m != j.end()) {
      if (!m->is_number_unsigned() || m->get<std::size_t>() == 0) throw SchemaError(0, "max_articles");
      r.max_articles = m->get<std::size_t>();
    }
    if (const auto c = j.find("config"); c != j.end()) {
      if (!c->is_object()) throw SchemaError(0, "config", "must be an object");
      r.config = *c;
    }
    return r;
  }
};

inline Session build_session(const CreateRequest& req, const RegressionModel& model, const PipelineConfig& defaults,
                             std::string id, std::int64_t now) {
  const PipelineConfig config = config_from_json(req.config, defaults);
  const std::size_t cap = req.max_articles.value_or(config.max_articles);
  Corpus corpus = req.corpus_path ? ingest_corpus(*req.corpus_path, req.topic_name, cap)
                                  : corpus_from_json(*req.corpus, req.topic_name, cap);
  return run_pipeline(std::move(corpus), model, config, std::move(id), now);
}

// Applies one journalled mutation to a session.
inline void apply_mutation(Session& s, const std::string& op, const nlohmann::json& args, std::int64_t now) {
  if (op == "choose_labels") {
    choose_labels(s, args.at("labels").get<std::vector<std::string>>(), now);
  } else if (op == "add_label") {
    add_label(s, args.at("label").get<std::string>(), now);
  } else if (op == "choose_blocks") {
    choose_blocks(s, args.at("label").get<std::string>(), args.at("block_ids").get<std::vector<std::string>>(),
                  args.value("edits", std::map<std::string, std::string>{}), args.value("force", false), now);
  } else if (op == "synthesize") {
    synthesize(s, now);
  } else if (op == "edit_final") {
    edit_final(s, args.at("text").get<std::string>(), now);
  } else if (op == "reset") {
    reset(s, now);
  } else {
    throw Error("UnknownOperation", "unknown session operation: " + op, op);
  }
}

class SessionStore {
 public:
  using Clock = std::function<std::int64_t()>;

  SessionStore(fs::path root, RegressionModel model, PipelineConfig defaults = {}, Clock clock = wall_clock_ms)
      : root_(std::move(root)), model_(std::move(model)), defaults_(std::move(defaults)), clock_(std::move(clock)) {
    fs::create_directories(root_ / "sessions");
    load();
    journal_fd_ = ::open(journal_path().c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (journal_fd_ < 0) throw Error("IoError", "cannot open journal: " + journal_path().string());
  }

  ~SessionStore() {
    if (journal_fd_ >= 0) ::close(journal_fd_);
  }

  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  const RegressionModel& model() const { return model_; }
  const PipelineConfig& defaults() const { return defaults_; }
  const fs::path& root() const { return root_; }

  // Runs the pipeline and commits the new session.
  Session create(const CreateRequest& req) {
    std::string id;
    {
      std::lock_guard<std::mutex> lock(map_mutex_);
      do id = detail::random_token_128();
      while (sessions_.contains(id) || reserved_.contains(id));
      reserved_.insert(id);
    }
    const std::int64_t now = clock_();
    Session s;
    try {
      s = build_session(req, model_, defaults_, id, now);
    } catch (...) {
      std::lock_guard<std::mutex> lock(map_mutex_);
      reserved_.erase(id);
      throw;
    }
    auto entry = std::make_shared<Entry>();
    entry->session = s;
    {
      std::lock_guard<std::mutex> entry_lock(entry->mutex);
      entry->revision = append_journal(id, "create", req.to_json(), now);
      persist(*entry);
    }
    std::lock_guard<std::mutex> lock(map_mutex_);
    reserved_.erase(id);
    sessions_[id] = std::move(entry);
    return s;
  }

  std::optional<Session> get(const std::string& id) const {
    const auto entry = find(id);
    if (!entry) return std::nullopt;
    std::lock_guard<std::mutex> lock(entry->mutex);
    return entry->session;
  }

  // Validates the mutation on a copy, journals it, persists, then publishes.
  // Domain errors leave both disk and memory untouched.
  Session mutate(const std::string& id, const std::string& op, const nlohmann::json& args) {
    const auto entry = find(id);
    if (!entry) throw Error("NotFound", "no such session: " + id, id);
    std::lock_guard<std::mutex> lock(entry->mutex);
    const std::int64_t now = clock_();
    Session next = entry->session;
    apply_mutation(next, op, args, now);
    entry->revision = append_journal(id, op, args, now);
    entry->session = std::move(next);
    persist(*entry);
    return entry->session;
  }

  std::vector<std::string> ids() const {
    std::lock_guard<std::mutex> lock(map_mutex_);
    std::vector<std::string> out;
    for (const auto& kv : sessions_) out.push_back(kv.first);
    return out;
  }

  fs::path journal_path() const { return root_ / "journal.jsonl"; }
  fs::path session_path(const std::string& id) const { return root_ / "sessions" / (id + ".json"); }

 private:
  struct Entry {
    mutable std::mutex mutex;
    Session session;
    std::uint64_t revision = 0;
  };

  std::shared_ptr<Entry> find(const std::string& id) const {
    std::lock_guard<std::mutex> lock(map_mutex_);
    const auto it = sessions_.find(id);
    return it == sessions_.end() ? nullptr : it->second;
  }

  std::uint64_t append_journal(const std::string& id, const std::string& op, const nlohmann::json& args,
                               std::int64_t now) {
    std::lock_guard<std::mutex> lock(journal_mutex_);
    const std::uint64_t seq = ++seq_;
    const nlohmann::json line = {{"seq", seq}, {"session", id}, {"op", op}, {"args", args}, {"now", now}};
    detail::write_all(journal_fd_, line.dump() + "\n", journal_path());
    ::fsync(journal_fd_);
    return seq;
  }

  void persist(const Entry& e) const {
    const nlohmann::json record = {{"revision", e.revision}, {"session", session_to_json(e.session)}};
    detail::atomic_write(session_path(e.session.id), record.dump());
  }

  void load() {
    for (const auto& file : fs::directory_iterator(root_ / "sessions")) {
      if (file.path().extension() != ".json") continue;
      std::ifstream in(file.path());
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error&) {
        continue;  // only ever a stray partial temp; committed files are renamed whole
      }
      auto entry = std::make_shared<Entry>();
      entry->revision = record.at("revision").get<std::uint64_t>();
      entry->session = session_from_json(record.at("session"));
      seq_ = std::max(seq_, entry->revision);
      sessions_[entry->session.id] = std::move(entry);
    }

    std::ifstream journal(journal_path());
    std::string raw;
    while (std::getline(journal, raw)) {
      nlohmann::json line;
      try {
        line = nlohmann::json::parse(raw);
      } catch (const nlohmann::json::parse_error&) {
        continue;  // torn tail from a crash mid-append
      }
      const auto seq = line.at("seq").get<std::uint64_t>();
      seq_ = std::max(seq_, seq);
      const auto id = line.at("session").get<std::string>();
      const auto op = line.at("op").get<std::string>();
      const auto now = line.at("now").get<std::int64_t>();
      auto it = sessions_.find(id);
      if (op == "create") {
        if (it != sessions_.end()) continue;
        auto entry = std::make_shared<Entry>();
        entry->session = build_session(CreateRequest::from_json(line.at("args")), model_, defaults_, id, now);
        entry->revision = seq;
        persist(*entry);
        sessions_[id] = std::move(entry);
        continue;
      }
      if (it == sessions_.end() || it->second->revision >= seq) continue;
      try {
        apply_mutation(it->second->session, op, line.at("args"), now);
      } catch (const Error&) {
        continue;  // entries are validated before they are journalled
      }
      it->second->revision = seq;
      persist(*it->second);
    }
  }

  fs::path root_;
  RegressionModel model_;
  PipelineConfig defaults_;
  Clock clock_;
  int journal_fd_ = -1;
  std::uint64_t seq_ = 0;
  mutable std::mutex map_mutex_;
  std::mutex journal_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::set<std::string> reserved_;
};

}  // namespace newsynth
