#include <thread>

#include <gtest/gtest.h>

#include "newsynth/service.hpp"
#include "pipeline_fixture.hpp"
#include "support.hpp"

using namespace newsynth;
using json = nlohmann::json;

namespace {

// A store plus server on a free loopback port, run on a background thread.
class LiveService {
 public:
  LiveService() : store_(dir_.path(), pipeline_fixture::model()), service_(store_, 4) {
    service_.bind(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveService() {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(120, 0);
    return c;
  }

 private:
  fixture::TempDir dir_{"svc"};
  SessionStore store_;
  Service service_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

const json kCreate = {{"corpus_path", pipeline_fixture::corpus_path()}};

json body(const httplib::Result& r) { return json::parse(r->body); }

}  // namespace

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() { live_ = new LiveService(); }
  static void TearDownTestSuite() {
    delete live_;
    live_ = nullptr;
  }

  static httplib::Result post(const std::string& path, const json& j) {
    return live_->client().Post(path, j.dump(), "application/json");
  }
  static httplib::Result put(const std::string& path, const json& j) {
    return live_->client().Put(path, j.dump(), "application/json");
  }
  static httplib::Result get(const std::string& path) { return live_->client().Get(path); }

  static inline LiveService* live_ = nullptr;
};

TEST_F(ServiceTest, Health) {
  const auto r = get("/v1/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(body(r)["status"], "ok");
}

TEST_F(ServiceTest, CreateReturnsRankedLabels) {
  const auto r = post("/v1/sessions", kCreate);
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto j = body(r);
  EXPECT_EQ(j["stage"], "LABELS_READY");
  EXPECT_FALSE(j["labels"].empty());
  EXPECT_LE(j["labels"].size(), 20u);
  EXPECT_EQ(j["session_id"].get<std::string>().size(), 32u);
}

TEST_F(ServiceTest, BadCreateRequests) {
  const auto empty = post("/v1/sessions", {{"corpus", json::array()}, {"topic_name", "t"}});
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->status, 400);
  EXPECT_EQ(body(empty)["code"], "EmptyCorpus");
  const auto missing = post("/v1/sessions", {{"corpus_path", "/nonexistent/x.jsonl"}});
  EXPECT_EQ(missing->status, 400);
  EXPECT_EQ(body(missing)["code"], "FileNotFound");
  const auto garbage = live_->client().Post("/v1/sessions", "{not json", "application/json");
  EXPECT_EQ(garbage->status, 400);
  EXPECT_EQ(body(garbage)["code"], "BadJson");
  const auto config = post("/v1/sessions", {{"corpus_path", pipeline_fixture::corpus_path()}, {"config", {{"nope", 1}}}});
  EXPECT_EQ(config->status, 400);
  EXPECT_EQ(body(config)["code"], "InvalidConfig");
}

TEST_F(ServiceTest, ConcurrentCreatesAgree) {
  std::vector<std::thread> threads;
  std::vector<json> out(4);
  for (std::size_t i = 0; i < out.size(); ++i)
    threads.emplace_back([&, i] {
      const auto r = post("/v1/sessions", kCreate);
      out[i] = r && r->status == 200 ? body(r) : json();
    });
  for (auto& t : threads) t.join();
  std::set<std::string> ids;
  for (const auto& j : out) {
    ASSERT_FALSE(j.is_null());
    ids.insert(j["session_id"].get<std::string>());
    EXPECT_EQ(j["labels"], out[0]["labels"]);
  }
  EXPECT_EQ(ids.size(), out.size());
}

TEST_F(ServiceTest, BlocksEndpoint) {
  const auto created = body(post("/v1/sessions", kCreate));
  const std::string id = created["session_id"];
  const std::string label = created["labels"][0]["label"];
  EXPECT_EQ(get("/v1/sessions/" + id + "/labels/no such label/blocks")->status, 404);
  EXPECT_EQ(get("/v1/sessions/ffffffff/labels/" + label + "/blocks")->status, 404);
  EXPECT_EQ(get("/v1/sessions/ffffffff")->status, 404);

  const auto all = body(get("/v1/sessions/" + id + "/labels/" + label + "/blocks"));
  ASSERT_GE(all["total"].get<std::size_t>(), 3u);
  EXPECT_EQ(all["blocks"].size(), all["total"].get<std::size_t>());
  const Corpus corpus = pipeline_fixture::corpus();
  for (std::size_t i = 0; i < all["blocks"].size(); ++i) {
    const auto& b = all["blocks"][i];
    EXPECT_EQ(b["mmr_rank"], i);
    const auto& art = *std::find_if(corpus.articles.begin(), corpus.articles.end(),
                                    [&](const auto& a) { return a.id == b["article_id"]; });
    std::string joined;
    for (std::size_t s = b["sentence_range"][0]; s < b["sentence_range"][1].get<std::size_t>(); ++s)
      joined += (joined.empty() ? "" : " ") + art.body[s].text;
    EXPECT_EQ(b["text"], joined);
    EXPECT_NE(b["text"].get<std::string>().find(label), std::string::npos);
  }
  const auto page = body(get("/v1/sessions/" + id + "/labels/" + label + "/blocks?offset=1&limit=2"));
  ASSERT_EQ(page["blocks"].size(), 2u);
  EXPECT_EQ(page["blocks"][0], all["blocks"][1]);
  EXPECT_EQ(page["blocks"][1], all["blocks"][2]);
  EXPECT_EQ(get("/v1/sessions/" + id + "/labels/" + label + "/blocks?limit=-1")->status, 400);
}

TEST_F(ServiceTest, InteractiveFlow) {
  const auto created = body(post("/v1/sessions", kCreate));
  const std::string id = created["session_id"];
  const std::string base = "/v1/sessions/" + id;
  const std::string a = created["labels"][0]["label"], b = created["labels"][1]["label"];

  EXPECT_EQ(put(base + "/draft", {{"text", "early"}})->status, 409);
  EXPECT_EQ(get(base + "/export")->status, 409);
  EXPECT_EQ(put(base + "/labels", {{"labels", {"bogus"}}})->status, 422);
  EXPECT_EQ(put(base + "/labels", {{"labels", "a"}})->status, 400);

  const auto chosen = put(base + "/labels", {{"labels", {b, a}}});
  ASSERT_EQ(chosen->status, 200) << chosen->body;
  EXPECT_EQ(body(chosen)["stage"], "BLOCKS_READY");

  const auto blocks = body(get(base + "/labels/" + a + "/blocks"));
  const std::string b0 = blocks["blocks"][0]["block_id"], b2 = blocks["blocks"][2]["block_id"];
  EXPECT_EQ(put(base + "/labels/" + a + "/blocks", {{"block_ids", {b0}}, {"edits", {{"x:1", "t"}}}})->status, 422);
  ASSERT_EQ(put(base + "/labels/" + a + "/blocks", {{"block_ids", {b2, b0}}, {"edits", {{b0, "My own words."}}}})->status,
            200);

  const auto first = post(base + "/synthesize", json::object());
  ASSERT_EQ(first->status, 200) << first->body;
  const auto second = post(base + "/synthesize", json::object());
  EXPECT_EQ(body(first), body(second));
  const auto article = body(first);
  ASSERT_EQ(article["sections"].size(), 2u);
  EXPECT_EQ(article["sections"][0]["label"], b);
  const auto& paras = article["sections"][1]["paragraphs"];
  ASSERT_EQ(paras.size(), 2u);
  EXPECT_EQ(paras[0]["block_id"], b2);
  EXPECT_EQ(paras[0]["text"], blocks["blocks"][2]["text"]);
  EXPECT_EQ(paras[1]["text"], "My own words.");
  EXPECT_TRUE(paras[1]["edited"].get<bool>());

  EXPECT_EQ(put(base + "/labels", {{"labels", {a}}})->status, 409);
  ASSERT_EQ(put(base + "/draft", {{"text", "Edited article."}})->status, 200);
  const auto md = get(base + "/export?format=md");
  EXPECT_EQ(md->status, 200);
  EXPECT_EQ(md->body, "Edited article.");
  EXPECT_EQ(body(get(base + "/export?format=json"))["draft"], "Edited article.");
  EXPECT_EQ(get(base + "/export?format=pdf")->status, 400);
  const auto summary = body(get(base));
  EXPECT_EQ(summary["stage"], "SYNTHESIZED");
  EXPECT_GT(summary["updated_at"].get<std::int64_t>(), 0);

  ASSERT_EQ(post(base + "/reset", json::object())->status, 200);
  EXPECT_EQ(body(get(base))["stage"], "LABELS_READY");
}

TEST_F(ServiceTest, UserLabel) {
  const std::string id = body(post("/v1/sessions", kCreate))["session_id"];
  const auto added = post("/v1/sessions/" + id + "/labels", {{"label", "ticket prices"}});
  ASSERT_EQ(added->status, 200) << added->body;
  const auto labels = body(added)["labels"];
  EXPECT_TRUE(labels.back()["user_added"].get<bool>());
  EXPECT_EQ(post("/v1/sessions/" + id + "/labels", {{"label", "ticket prices"}})->status, 422);
  EXPECT_EQ(post("/v1/sessions/" + id + "/labels", {{"text", "x"}})->status, 400);
}

TEST_F(ServiceTest, UnknownRoute) {
  const auto r = get("/v2/anything");
  EXPECT_EQ(r->status, 404);
  EXPECT_EQ(body(r)["code"], "NotFound");
}
