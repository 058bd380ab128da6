#pragma once

// Session-based HTTP+JSON API (all routes under /v1) over a SessionStore.

#include <semaphore>
#include <string>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "newsynth/error.hpp"
#include "newsynth/store.hpp"
#include "newsynth/synth.hpp"

namespace newsynth {

inline int http_status_for(const std::string& code) {
  if (code == "NotFound") return 404;
  if (code == "StageViolation" || code == "NotSynthesized") return 409;
  if (code == "SchemaError" || code == "EmptyCorpus" || code == "FileNotFound" || code == "InvalidConfig" ||
      code == "BadJson" || code == "BadRequest")
    return 400;
  if (code == "NoCandidates" || code == "UnknownLabel" || code == "DuplicateLabel" || code == "UnknownBlock" ||
      code == "DuplicateBlock" || code == "EditWithoutSelection" || code == "EmptySection" ||
      code == "EmptySelection" || code == "InvalidLabel")
    return 422;
  return 500;
}

inline nlohmann::json error_body(const std::string& code, const std::string& message, const std::string& detail) {
  return {{"code", code}, {"message", message}, {"detail", detail}};
}

inline nlohmann::json session_summary(const Session& s) {
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& l : s.labels)
    labels.push_back({{"label", l.label.surface},
                      {"score", l.label.score},
                      {"tf", l.label.tf},
                      {"user_added", l.user_added},
                      {"candidates", l.ranked.size()}});
  nlohmann::json choices = nlohmann::json::object();
  for (const auto& [label, c] : s.block_choices) choices[label] = {{"block_ids", c.block_ids}, {"edits", c.edits}};
  return {{"session_id", s.id},
          {"topic_name", s.corpus.topic_name},
          {"stage", stage_name(s.stage)},
          {"labels", std::move(labels)},
          {"chosen_labels", s.chosen_labels},
          {"block_choices", std::move(choices)},
          {"created_at", s.created_at},
          {"updated_at", s.updated_at}};
}

class Service {
 public:
  explicit Service(SessionStore& store, std::ptrdiff_t pipeline_workers = 2)
      : store_(store), pipeline_slots_(pipeline_workers) {}

  void bind(httplib::Server& server) {
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "unknown error";
      try {
        if (ep) std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      send(res, 500, error_body("Internal", "internal error", what));
    });
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (res.body.empty()) {
        const std::string code = res.status == 404 ? "NotFound" : "HttpError";
        send(res, res.status, error_body(code, "no route for " + req.method + " " + req.path, req.path));
      }
    });

    server.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
      send(res, 200, {{"status", "ok"}});
    });

    server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto request = CreateRequest::from_json(parse_body(req));
        pipeline_slots_.acquire();
        Session s;
        try {
          s = store_.create(request);
        } catch (...) {
          pipeline_slots_.release();
          throw;
        }
        pipeline_slots_.release();
        nlohmann::json labels = nlohmann::json::array();
        for (const auto& l : s.labels) labels.push_back({{"label", l.label.surface}, {"score", l.label.score}});
        send(res, 200, {{"session_id", s.id}, {"stage", stage_name(s.stage)}, {"labels", labels}});
      });
    });

    server.Get(R"(/v1/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] { send(res, 200, session_summary(load(req.matches[1]))); });
    });

    server.Get(R"(/v1/sessions/([0-9a-f]+)/labels/(.+)/blocks)", [this](const httplib::Request& req,
                                                                         httplib::Response& res) {
      handle(res, [&] {
        const Session s = load(req.matches[1]);
        const std::string label = req.matches[2];
        const LabelEntry* entry = s.find_label(label);
        if (!entry) throw Error("NotFound", "unknown label: " + label, label);
        const std::size_t offset = query_size(req, "offset", 0);
        const std::size_t limit = query_size(req, "limit", entry->ranked.size());
        nlohmann::json blocks = nlohmann::json::array();
        for (std::size_t i = offset; i < entry->ranked.size() && i < offset + limit; ++i) {
          const auto& r = entry->ranked[i];
          blocks.push_back({{"block_id", r.block.block_id},
                            {"article_id", r.block.article_id},
                            {"sentence_range", {r.block.start, r.block.end}},
                            {"published_at", r.block.published_at},
                            {"text", block_text(s.corpus, r.block)},
                            {"ws", r.ws},
                            {"mmr_rank", r.mmr_rank}});
        }
        send(res, 200,
             {{"label", label}, {"total", entry->ranked.size()}, {"offset", offset}, {"blocks", std::move(blocks)}});
      });
    });

    server.Put(R"(/v1/sessions/([0-9a-f]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto body = parse_body(req);
        require_string_array(body, "labels");
        send(res, 200, session_summary(store_.mutate(req.matches[1], "choose_labels", {{"labels", body["labels"]}})));
      });
    });

    server.Post(R"(/v1/sessions/([0-9a-f]+)/labels)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto body = parse_body(req);
        if (!body.contains("label") || !body["label"].is_string()) throw Error("BadRequest", "body needs a \"label\" string");
        send(res, 200, session_summary(store_.mutate(req.matches[1], "add_label", {{"label", body["label"]}})));
      });
    });

    server.Put(R"(/v1/sessions/([0-9a-f]+)/labels/(.+)/blocks)", [this](const httplib::Request& req,
                                                                         httplib::Response& res) {
      handle(res, [&] {
        const auto body = parse_body(req);
        require_string_array(body, "block_ids");
        nlohmann::json args = {{"label", std::string(req.matches[2])}, {"block_ids", body["block_ids"]}};
        if (body.contains("edits")) {
          const auto& edits = body["edits"];
          const bool ok = edits.is_object() &&
                          std::all_of(edits.begin(), edits.end(), [](const auto& v) { return v.is_string(); });
          if (!ok) throw Error("BadRequest", "\"edits\" must map block ids to strings");
          args["edits"] = edits;
        }
        if (body.contains("force")) {
          if (!body["force"].is_boolean()) throw Error("BadRequest", "\"force\" must be a boolean");
          args["force"] = body["force"];
        }
        send(res, 200, session_summary(store_.mutate(req.matches[1], "choose_blocks", args)));
      });
    });

    server.Post(R"(/v1/sessions/([0-9a-f]+)/synthesize)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const Session s = store_.mutate(req.matches[1], "synthesize", nlohmann::json::object());
        send(res, 200, export_json(s));
      });
    });

    server.Post(R"(/v1/sessions/([0-9a-f]+)/reset)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        send(res, 200, session_summary(store_.mutate(req.matches[1], "reset", nlohmann::json::object())));
      });
    });

    server.Put(R"(/v1/sessions/([0-9a-f]+)/draft)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const auto body = parse_body(req);
        if (!body.contains("text") || !body["text"].is_string()) throw Error("BadRequest", "body needs a \"text\" string");
        const Session s = store_.mutate(req.matches[1], "edit_final", {{"text", body["text"]}});
        send(res, 200, session_summary(s));
      });
    });

    server.Get(R"(/v1/sessions/([0-9a-f]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&] {
        const Session s = load(req.matches[1]);
        const std::string format = req.has_param("format") ? req.get_param_value("format") : "md";
        if (format == "md") {
          res.status = 200;
          res.set_content(export_markdown(s), "text/markdown; charset=utf-8");
        } else if (format == "json") {
          send(res, 200, export_json(s));
        } else {
          throw Error("BadRequest", "format must be md or json", format);
        }
      });
    });
  }

 private:
  static void send(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  template <typename F>
  static void handle(httplib::Response& res, F&& f) {
    try {
      f();
    } catch (const Error& e) {
      send(res, http_status_for(e.code()), error_body(e.code(), e.what(), e.detail()));
    } catch (const nlohmann::json::exception& e) {
      send(res, 400, error_body("BadRequest", "request has the wrong shape", e.what()));
    }
  }

  static nlohmann::json parse_body(const httplib::Request& req) {
    try {
      auto j = nlohmann::json::parse(req.body);
      if (!j.is_object()) throw Error("BadRequest", "request body must be a JSON object");
      return j;
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("BadJson", "request body is not valid JSON", e.what());
    }
  }

  static void require_string_array(const nlohmann::json& body, const char* key) {
    const auto it = body.find(key);
    const bool ok = it != body.end() && it->is_array() &&
                    std::all_of(it->begin(), it->end(), [](const auto& v) { return v.is_string(); });
    if (!ok) throw Error("BadRequest", std::string("body needs a \"") + key + "\" array of strings", key);
  }

  static std::size_t query_size(const httplib::Request& req, const char* key, std::size_t fallback) {
    if (!req.has_param(key)) return fallback;
    const std::string v = req.get_param_value(key);
    if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos || v.size() > 9)
      throw Error("BadRequest", std::string("query parameter ") + key + " must be a non-negative integer", v);
    return std::stoul(v);
  }

  Session load(const std::string& id) const {
    auto s = store_.get(id);
    if (!s) throw Error("NotFound", "no such session: " + id, id);
    return std::move(*s);
  }

  SessionStore& store_;
  std::counting_semaphore<64> pipeline_slots_;
};

}  // namespace newsynth
