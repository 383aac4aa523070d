#include <doctest.h>

#include <httplib.h>

#include <regex>
#include <thread>

#include "../support/test_support.hpp"
#include "genreloom/app.hpp"
#include "genreloom/error.hpp"
#include "genreloom/server.hpp"

using namespace genreloom;
using namespace testing_support;
using nlohmann::json;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars](const char* name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

struct Running {
  TempDir dir;
  std::unique_ptr<App> app;
  std::unique_ptr<HttpService> svc;
  std::thread th;
  int port = 0;
  std::unique_ptr<httplib::Client> client;

  explicit Running(FnBackend::Fn fn = story_reply) {
    AppConfig cfg;
    cfg.store = dir.path();
    app = std::make_unique<App>(cfg, std::make_shared<FnBackend>(std::move(fn)));
    svc = std::make_unique<HttpService>(*app);
    port = svc->bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    th = std::thread([this] { svc->run(); });
    svc->wait_until_ready();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  ~Running() {
    svc->stop();
    th.join();
  }

  std::pair<int, json> post(const std::string& path, const json& body = json::object()) {
    auto r = client->Post(path, body.dump(), "application/json");
    REQUIRE(r);
    return {r->status, r->body.empty() ? json() : json::parse(r->body)};
  }
  std::pair<int, json> get(const std::string& path) {
    auto r = client->Get(path);
    REQUIRE(r);
    return {r->status, json::parse(r->body)};
  }
};

}  // namespace

TEST_CASE("config precedence: file, then environment, then flags") {
  TempDir dir;
  write_file(dir / "c.json", R"({"port": 9000, "host": "0.0.0.0", "store": "from-file", "concurrency_cap": 2})");
  ConfigOverrides flags;
  flags.config_file = dir / "c.json";
  AppConfig c = resolve_config(flags, env_of({}));
  CHECK(c.port == 9000);
  CHECK(c.host == "0.0.0.0");
  CHECK(c.concurrency_cap == 2);

  c = resolve_config(flags, env_of({{"GENRELOOM_PORT", "9100"}, {"OPENAI_API_KEY", "k1"}, {"GENRELOOM_TRANSPORT", "replay"}}));
  CHECK(c.port == 9100);
  CHECK(c.api_key == "k1");
  CHECK(c.transport == TransportMode::replay);
  CHECK(c.fixtures_path() == fs::path("from-file") / "fixtures.jsonl");

  flags.port = 9200;
  flags.store = "from-flag";
  c = resolve_config(flags, env_of({{"GENRELOOM_PORT", "9100"}, {"GENRELOOM_API_KEY", "k2"}, {"OPENAI_API_KEY", "k1"}}));
  CHECK(c.port == 9200);
  CHECK(c.store == "from-flag");
  CHECK(c.api_key == "k2");

  ConfigOverrides via_env;
  c = resolve_config(via_env, env_of({{"GENRELOOM_CONFIG", (dir / "c.json").string()}}));
  CHECK(c.store == "from-file");

  CHECK_THROWS_AS(resolve_config({}, env_of({{"GENRELOOM_PORT", "http"}})), Error);
  CHECK_THROWS_AS(resolve_config({}, env_of({{"GENRELOOM_TRANSPORT", "carrier-pigeon"}})), Error);
  write_file(dir / "bad.json", "[1]");
  flags.config_file = dir / "bad.json";
  CHECK_THROWS_AS(resolve_config(flags, env_of({})), Error);
}

TEST_CASE("title specs") {
  Exemplar e = parse_title_spec("Emma (1815)", FundamentalGenre::comedy);
  CHECK(e.title == "Emma");
  CHECK(e.year_text == "1815");
  e = parse_title_spec("\"The Trial\" by Franz Kafka (1925)", FundamentalGenre::satire);
  CHECK(e.title == "The Trial");
  CHECK(e.author == "Franz Kafka");
  CHECK_THROWS_AS(parse_title_spec(" (1900)", FundamentalGenre::satire), Error);
}

TEST_CASE("status mapping") {
  CHECK(http_status_of(ErrorCode::unknown_pattern) == 404);
  CHECK(http_status_of(ErrorCode::invalid_state) == 409);
  CHECK(http_status_of(ErrorCode::revision_limit) == 409);
  CHECK(http_status_of(ErrorCode::invalid_premise) == 422);
  CHECK(http_status_of(ErrorCode::retries_exhausted) == 502);
  CHECK(http_status_of(ErrorCode::store_corrupt) == 500);
  const json j = api_error(Error(ErrorCode::immutable, "no", {{"id", "comedy"}}));
  CHECK(j["code"] == "immutable");
  CHECK(j["details"]["id"] == "comedy");
}

TEST_CASE("app refuses replay without a fixture file") {
  TempDir dir;
  AppConfig cfg;
  cfg.store = dir.path();
  cfg.transport = TransportMode::replay;
  CHECK_THROWS_AS(App{cfg}, Error);
}

TEST_CASE("http session walk-through") {
  Running srv;
  auto [st, patterns] = srv.get("/patterns");
  CHECK(st == 200);
  CHECK(patterns.size() == 6);

  auto [cs, session] = srv.post("/sessions", {{"premise", "A sorceress finds a tower."}, {"pattern_id", "mystery"}});
  REQUIRE(cs == 201);
  const std::string id = session["id"];
  CHECK(session["stage_count"] == 9);

  CHECK(srv.post("/sessions/" + id + "/accept").first == 409);
  for (int k = 1; k <= 9; ++k) {
    auto [ds, d] = srv.post("/sessions/" + id + "/draft", k == 1 ? json{{"suggestion", "a raven"}} : json::object());
    REQUIRE(ds == 200);
    CHECK(d["event"]["stage_index"] == k);
    if (k == 1) {
      CHECK(d["event"]["suggestion"] == "a raven");
      auto [rs, r] = srv.post("/sessions/" + id + "/regenerate", {{"suggestion", "two ravens"}});
      CHECK(rs == 200);
      CHECK(r["event"]["revision"] == 2);
      auto [again, err] = srv.post("/sessions/" + id + "/draft");
      CHECK(again == 409);
      CHECK(err["code"] == "invalid-state");
    }
    auto [as, a] = srv.post("/sessions/" + id + "/accept");
    REQUIRE(as == 200);
    CHECK(a["story"].is_null() == (k < 9));
    if (k == 9) {
      const std::string story = a["story"]["id"];
      auto [gs, g] = srv.get("/stories/" + story);
      CHECK(gs == 200);
      CHECK(g["events"].size() == 9);
      auto r = srv.client->Get("/stories/" + story + "/export?format=markdown");
      REQUIRE(r);
      CHECK(r->status == 200);
      CHECK(r->get_header_value("Content-Type").find("text/markdown") == 0);
      CHECK(r->get_header_value("Content-Disposition").find("story-" + story + ".md") != std::string::npos);
      auto [xs, c] = srv.get("/stories/" + story + "/consistency");
      CHECK(xs == 200);
      CHECK(c.size() == 9);
    }
  }
  auto [gs, g] = srv.get("/sessions/" + id);
  CHECK(g["status"] == "complete");
}

TEST_CASE("http errors") {
  Running srv;
  auto [s1, e1] = srv.get("/patterns/nope");
  CHECK(s1 == 404);
  CHECK(e1["code"] == "unknown-pattern");
  auto [s2, e2] = srv.post("/sessions", {{"premise", "  "}, {"pattern_id", "comedy"}});
  CHECK(s2 == 422);
  CHECK(e2["code"] == "invalid-premise");
  auto r = srv.client->Post("/sessions", "{nope", "application/json");
  REQUIRE(r);
  CHECK(r->status == 422);
  auto d = srv.client->Delete("/patterns/comedy");
  REQUIRE(d);
  CHECK(d->status == 409);
  auto [s3, e3] = srv.get("/no/such/route");
  CHECK(s3 == 404);
  CHECK(e3.contains("code"));
  auto [s4, e4] = srv.get("/sessions/123");
  CHECK(s4 == 404);
  CHECK(e4["code"] == "not-found");
}

TEST_CASE("provider failures surface as 502") {
  Running srv([](const ChatTranscript&) { return http(400, "nope"); });
  auto [cs, session] = srv.post("/sessions", {{"premise", "P."}, {"pattern_id", "comedy"}});
  REQUIRE(cs == 201);
  auto [ds, d] = srv.post("/sessions/" + session["id"].get<std::string>() + "/draft");
  CHECK(ds == 502);
  CHECK(d["code"] == "provider-error");
  auto [gs, g] = srv.get("/sessions/" + session["id"].get<std::string>());
  CHECK(g["status"] == "drafting");
}

TEST_CASE("/spec lists every route and every route is served") {
  Running srv;
  auto [st, spec] = srv.get("/spec");
  REQUIRE(st == 200);
  CHECK(spec == service_description());
  for (const auto& r : service_routes()) {
    std::string method = r.method;
    std::transform(method.begin(), method.end(), method.begin(), ::tolower);
    REQUIRE_MESSAGE(spec["paths"].contains(r.path), r.path);
    CHECK_MESSAGE(spec["paths"][r.path].contains(method), r.method, " ", r.path);

    const std::string concrete = std::regex_replace(r.path, std::regex(R"(\{[a-z_]+\})"), "999");
    httplib::Result res = r.method == "GET"    ? srv.client->Get(concrete)
                          : r.method == "POST" ? srv.client->Post(concrete, "{}", "application/json")
                                               : srv.client->Delete(concrete);
    REQUIRE(res);
    const json body = json::parse(res->body);
    if (res->status >= 400) {
      CHECK_MESSAGE(body["message"] != "no such route", r.method, " ", r.path);
      CHECK(body["code"] != "internal");
    }
  }
}
