#include <cstdlib>
#include <fstream>

#include <doctest.h>
#include <httplib.h>

#include "corpusforge/corpus.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/service.hpp"
#include "support.hpp"

using namespace corpusforge;
using nlohmann::json;

namespace {

struct Http {
  httplib::Client client;
  explicit Http(int port) : client("127.0.0.1", port) {}

  httplib::Headers auth(const std::string& token) const {
    if (token.empty()) return {};
    return {{"Authorization", "Bearer " + token}};
  }
  httplib::Result get(const std::string& path, const std::string& token = {}) { return client.Get(path, auth(token)); }
  httplib::Result post(const std::string& path, const json& body, const std::string& token = {}) {
    return client.Post(path, auth(token), body.dump(), "application/json");
  }
  httplib::Result post_raw(const std::string& path, const std::string& body, const std::string& token = {}) {
    return client.Post(path, auth(token), body, "application/json");
  }
};

std::string error_kind(const httplib::Result& r) { return json::parse(r->body).at("error"); }

service::ServiceConfig base_config() {
  service::ServiceConfig c;
  c.directions = {{"che", "rus"}, {"rus", "che"}};
  c.exam_pools["che-rus"] = testing::data_dir() / "exam" / "che-rus";
  return c;
}

struct Worker {
  std::string token;
  std::uint64_t id = 0;
};

Worker register_worker(Http& h, const std::string& name) {
  const auto r = h.post("/v1/workers", {{"name", name}, {"langs", {"che", "rus"}}});
  REQUIRE(r);
  REQUIRE(r->status == 201);
  const auto j = json::parse(r->body);
  return {j.at("token"), j.at("worker_id")};
}

void pass_exam(Http& h, const Worker& w, const service::Runtime& rt) {
  const auto form = rt.engine->exam_form({"che", "rus"});
  json answers = json::array();
  for (const auto& item : form.items) answers.push_back(item.true_label == exam::Label::correct ? "correct" : "incorrect");
  const auto r = h.post("/v1/exam/che-rus/answers", {{"version", form.version}, {"answers", answers}}, w.token);
  REQUIRE(r->status == 200);
  REQUIRE(json::parse(r->body).at("passed") == true);
}

}  // namespace

TEST_CASE("http status mapping") {
  CHECK(service::http_status(ErrorKind::input) == 400);
  CHECK(service::http_status(ErrorKind::range) == 400);
  CHECK(service::http_status(ErrorKind::auth) == 401);
  CHECK(service::http_status(ErrorKind::permission) == 403);
  CHECK(service::http_status(ErrorKind::not_found) == 404);
  CHECK(service::http_status(ErrorKind::conflict) == 409);
  CHECK(service::http_status(ErrorKind::environment) == 503);
  CHECK(service::http_status(ErrorKind::integrity) == 500);
}

TEST_CASE("worker endpoints and their status codes") {
  testing::ManualClock clock;
  testing::LiveService live(base_config(), testing::detector(testing::all_languages()), clock.clock());
  Http h(live.port);
  const auto pairs = testing::fixture_pairs("che-rus");

  // Registration.
  const auto w = register_worker(h, "alice");
  CHECK(w.token.size() == 32);
  const auto dup = h.post("/v1/workers", {{"name", "alice"}, {"langs", {"che"}}});
  CHECK(dup->status == 409);
  CHECK(error_kind(dup) == "conflict");
  CHECK(h.post("/v1/workers", {{"name", "bob"}, {"langs", json::array()}})->status == 400);
  CHECK(h.post_raw("/v1/workers", "{not json")->status == 400);
  CHECK(h.post_raw("/v1/workers", "")->status == 400);
  CHECK(h.post("/v1/workers", {{"name", "bob"}})->status == 400);

  // Auth.
  CHECK(h.get("/v1/workers/me")->status == 401);
  CHECK(h.get("/v1/workers/me", "0123456789abcdef0123456789abcdef")->status == 401);
  const auto me = h.get("/v1/workers/me", w.token);
  REQUIRE(me->status == 200);
  CHECK(json::parse(me->body).at("name") == "alice");
  CHECK(json::parse(me->body).at("flag").is_null());

  // Nothing to do yet: 204 with an empty body.
  auto next = h.get("/v1/tasks/next?kind=translate", w.token);
  CHECK(next->status == 204);
  CHECK(next->body.empty());
  CHECK(h.get("/v1/tasks/next", w.token)->status == 400);
  CHECK(h.get("/v1/tasks/next?kind=dance", w.token)->status == 400);

  // Sources with task creation.
  json lines = json::array();
  for (int i = 0; i < 3; ++i) lines.push_back(pairs[i].first);
  const auto up = h.post("/v1/sources", {{"lang", "che"}, {"lines", lines}, {"direction", "che-rus"}});
  REQUIRE(up->status == 201);
  CHECK(json::parse(up->body).at("tasks_created") == 3);
  CHECK(json::parse(up->body).at("report").at("kept") == 3);
  CHECK(h.post("/v1/sources", {{"lang", "rus"}, {"lines", lines}, {"direction", "che-rus"}})->status == 400);

  next = h.get("/v1/tasks/next?kind=translate", w.token);
  REQUIRE(next->status == 200);
  const auto task = json::parse(next->body);
  CHECK(task.at("instruction") == "Translate the sentence from Chechen to Russian");
  const auto task_id = task.at("task_id").get<std::uint64_t>();
  std::string text;
  for (const auto& [s, t] : pairs)
    if (s == task.at("source")) text = t;
  REQUIRE(!text.empty());

  const auto other = register_worker(h, "carol");
  const auto path = "/v1/tasks/" + std::to_string(task_id) + "/translation";
  CHECK(h.post(path, {{"text", text}, {"elapsed_ms", 30000}}, other.token)->status == 403);
  CHECK(h.post("/v1/tasks/999999/translation", {{"text", text}, {"elapsed_ms", 30000}}, w.token)->status == 404);
  CHECK(h.post("/v1/tasks/abc/translation", {{"text", text}, {"elapsed_ms", 30000}}, w.token)->status == 400);
  CHECK(h.post(path, {{"text", text}}, w.token)->status == 400);
  const auto sub = h.post(path, {{"text", text}, {"elapsed_ms", 30000}}, w.token);
  REQUIRE(sub->status == 200);
  CHECK(json::parse(sub->body).at("outcome") == "queued_for_verification");
  CHECK(h.post(path, {{"text", text}, {"elapsed_ms", 30000}}, w.token)->status == 403);

  // Copied source is auto-rejected with the failed check named.
  const auto t2 = json::parse(h.get("/v1/tasks/next?kind=translate", w.token)->body);
  const auto rej = h.post("/v1/tasks/" + std::to_string(t2.at("task_id").get<std::uint64_t>()) + "/translation",
                          {{"text", t2.at("source")}, {"elapsed_ms", 30000}}, w.token);
  REQUIRE(rej->status == 200);
  const auto rj = json::parse(rej->body);
  CHECK(rj.at("outcome") == "auto_rejected");
  CHECK(rj.at("check").at("failed_check") == "language");

  // Verification needs the exam.
  CHECK(h.get("/v1/tasks/next?kind=verify", other.token)->status == 204);
  CHECK(h.get("/v1/exam/fuv-eng", other.token)->status == 404);
  CHECK(h.get("/v1/exam/xx", other.token)->status == 400);
  const auto form = h.get("/v1/exam/che-rus", other.token);
  REQUIRE(form->status == 200);
  const auto fj = json::parse(form->body);
  CHECK(fj.at("items").size() == 10);
  CHECK_FALSE(fj.at("items").at(0).contains("true_label"));
  CHECK(h.post("/v1/exam/che-rus/answers", {{"version", fj.at("version")}, {"answers", json::array()}}, other.token)
            ->status == 400);
  CHECK(h.post("/v1/exam/che-rus/answers",
               {{"version", "stale"}, {"answers", json(std::vector<std::string>(10, "correct"))}}, other.token)
            ->status == 409);
  pass_exam(h, other, live.runtime);

  const auto a = h.get("/v1/tasks/next?kind=verify", other.token);
  REQUIRE(a->status == 200);
  const auto aj = json::parse(a->body);
  CHECK(aj.at("translation") == text);
  const auto vpath = "/v1/assignments/" + std::to_string(aj.at("assignment_id").get<std::uint64_t>()) + "/verdict";
  CHECK(h.post(vpath, {{"verdict", "maybe"}, {"elapsed_ms", 9000}}, other.token)->status == 400);
  CHECK(h.post(vpath, {{"verdict", "good"}, {"elapsed_ms", 9000}}, w.token)->status == 403);
  const auto v = h.post(vpath, {{"verdict", "good"}, {"elapsed_ms", 9000}}, other.token);
  REQUIRE(v->status == 200);
  CHECK(json::parse(v->body).at("outcome") == "recorded");
  CHECK(h.post(vpath, {{"verdict", "good"}, {"elapsed_ms", 9000}}, other.token)->status == 409);
  CHECK(h.post("/v1/assignments/424242/verdict", {{"verdict", "good"}, {"elapsed_ms", 9000}}, other.token)->status ==
        404);

  // Requester views.
  const auto funnel = json::parse(h.get("/v1/stats/funnel")->body);
  CHECK(funnel.dump().find("\"translated\":1") != std::string::npos);
  const auto cost = h.get("/v1/cost");
  REQUIRE(cost->status == 200);
  CHECK(json::parse(cost->body).at("display").at("total") == "$0.02");
  CHECK(h.get("/v1/cost?format=xml")->status == 400);
  CHECK(h.get("/v1/cost?worker=nobody")->status == 404);
  CHECK(h.get("/v1/cost?format=csv")->status == 200);
  CHECK(h.get("/v1/export?direction=che-rus&format=tsv")->body.empty());
  const auto pending = h.get("/v1/export?direction=che-rus&include_pending=true");
  CHECK(std::count(pending->body.begin(), pending->body.end(), '\n') == 1);
  CHECK(h.get("/v1/export")->status == 400);
  CHECK(h.get("/v1/export?direction=fuv-eng")->status == 400);
  CHECK(h.post("/v1/workers/nobody/clear", json::object())->status == 404);
  CHECK(h.post("/v1/workers/alice/clear", json::object())->status == 200);

  const auto routes = json::parse(h.get("/v1/routes")->body);
  CHECK(routes.size() == service::route_table().size());

  // Session expiry.
  clock.advance(live.runtime.engine->config().session_ttl_ms + 1);
  CHECK(h.get("/v1/workers/me", w.token)->status == 401);
}

TEST_CASE("accepted translations reach the export") {
  testing::LiveService live(base_config(), testing::detector(testing::all_languages()));
  Http h(live.port);
  const auto pairs = testing::fixture_pairs("che-rus");
  h.post("/v1/sources", {{"lang", "che"}, {"lines", {pairs[0].first}}, {"direction", "che-rus"}});
  const auto tr = register_worker(h, "tr");
  const auto t = json::parse(h.get("/v1/tasks/next?kind=translate", tr.token)->body);
  h.post("/v1/tasks/" + std::to_string(t.at("task_id").get<std::uint64_t>()) + "/translation",
         {{"text", pairs[0].second}, {"elapsed_ms", 30000}}, tr.token);
  for (const auto& verdict : {"good", "bad", "good"}) {
    const auto v = register_worker(h, std::string("v-") + verdict + std::to_string(std::rand()));
    pass_exam(h, v, live.runtime);
    const auto a = json::parse(h.get("/v1/tasks/next?kind=verify", v.token)->body);
    h.post("/v1/assignments/" + std::to_string(a.at("assignment_id").get<std::uint64_t>()) + "/verdict",
           {{"verdict", verdict}, {"elapsed_ms", 9000}}, v.token);
  }
  const auto tsv = h.get("/v1/export?direction=che-rus&format=tsv")->body;
  CHECK(tsv == pairs[0].first + "\t" + pairs[0].second + "\n");
  const auto rec = json::parse(h.get("/v1/export?direction=che-rus")->body);
  CHECK(rec.at("verdicts") == json({"good", "bad", "good"}));
  CHECK(rec.at("src_lang") == "che");
  const auto me = json::parse(h.get("/v1/workers/me", tr.token)->body);
  CHECK(me.at("earnings").at("translation") == "0.0200");
}

TEST_CASE("requester endpoints honour the token and the switch") {
  auto config = base_config();
  config.requester_token = "sekrit";
  {
    testing::LiveService live(config, testing::detector(testing::all_languages()));
    Http h(live.port);
    CHECK(h.get("/v1/stats/funnel")->status == 401);
    CHECK(h.get("/v1/stats/funnel", "wrong")->status == 401);
    CHECK(h.get("/v1/stats/funnel", "sekrit")->status == 200);
    CHECK(h.get("/v1/routes")->status == 200);
  }
  config.requester_enabled = false;
  testing::LiveService live(config, testing::detector(testing::all_languages()));
  Http h(live.port);
  CHECK(h.get("/v1/stats/funnel", "sekrit")->status == 403);
  CHECK(h.post("/v1/sources", {{"lang", "che"}, {"lines", {"x"}}}, "sekrit")->status == 403);
}

TEST_CASE("exam forms are installed over HTTP") {
  testing::LiveService live(base_config(), testing::detector(testing::all_languages()));
  Http h(live.port);
  const auto pools = exam::load_pools(testing::data_dir() / "exam" / "rus-che");
  json parallel = json::array(), glossary = json::array();
  for (const auto& [s, t] : pools.parallel) parallel.push_back({s, t});
  glossary.push_back({"Россия", "Росси"});
  const auto r = h.post("/v1/exam/rus-che/form",
                        {{"pools", {{"parallel", parallel}, {"glossary", glossary}, {"other_lang", pools.other_lang}}},
                         {"seed", 5}});
  REQUIRE(r->status == 201);
  const auto j = json::parse(r->body);
  CHECK(j.at("composition") == json({{"correct", 5}, {"mismatch", 2}, {"wrong_language", 1}, {"word_for_word", 2}}));
  const auto w = register_worker(h, "w");
  CHECK(json::parse(h.get("/v1/exam/rus-che", w.token)->body).at("version") == j.at("version"));

  auto form = json(exam::build_exam({"rus", "che"}, pools, 1));
  CHECK(h.post("/v1/exam/che-rus/form", {{"form", form}})->status == 400);
}

TEST_CASE("config parsing") {
  const auto dir = std::filesystem::temp_directory_path() / "corpusforge-config-test";
  std::filesystem::create_directories(dir / "pools");
  const auto text = R"(listen = 0.0.0.0:9090
directions = che-rus, rus-che
[price]
translation = 0.05
verdict_set = 0.02
[qc]
length_ratio_max = 2.5
fast_ms.translate = 5000
[exam]
pass_threshold = 9
pool.che-rus = pools
[requester]
token = abc
)";
  const auto c = service::parse_config(text, dir);
  CHECK(c.host == "0.0.0.0");
  CHECK(c.port == 9090);
  CHECK(c.directions.size() == 2);
  CHECK(c.prices.per_translation == Money::parse("0.05"));
  CHECK(c.prices.per_verdict_set == Money::parse("0.02"));
  CHECK(c.engine.length_ratio_max == 2.5);
  CHECK(c.engine.fast.translate_ms == 5000);
  CHECK(c.engine.exam_pass_threshold == 9);
  CHECK(c.exam_pools.at("che-rus") == dir / "pools");
  CHECK(c.requester_token == "abc");

  auto config_error = [](const std::string& t) {
    try {
      service::parse_config(t);
    } catch (const Error& e) {
      return e.kind() == ErrorKind::configuration;
    }
    return false;
  };
  CHECK(config_error("bogus = 1\n"));
  CHECK(config_error("[price]\ntranslation = -1\n"));
  CHECK(config_error("[price]\ntranslation = cheap\n"));
  CHECK(config_error("listen = nowhere\n"));
  CHECK(config_error("[exam]\npass_threshold = 11\n"));
  CHECK(config_error("[langid]\nprofile.eng = /does/not/exist\n"));
  CHECK(config_error("[qc]\nlength_ratio_max = 0.5\n"));

  const auto file = dir / "svc.conf";
  std::ofstream(file) << text;
  CHECK(service::load_config(file).exam_pools.at("che-rus") == dir / "pools");
  CHECK(service::resolve_config_path(std::string("x.conf")) == std::filesystem::path("x.conf"));
  ::setenv("CORPUSFORGE_CONFIG", file.c_str(), 1);
  CHECK(service::resolve_config_path(std::nullopt) == file);
  ::unsetenv("CORPUSFORGE_CONFIG");
  CHECK_FALSE(service::resolve_config_path(std::nullopt));
  std::filesystem::remove_all(dir);
}

TEST_CASE("the shipped example config loads") {
  const auto c = service::load_config(testing::data_dir() / "example.conf");
  CHECK(c.directions.size() == 4);
  CHECK(c.train_texts.size() == 4);
  CHECK(c.exam_pools.size() == 4);
  CHECK(c.prices.per_translation == Money::parse("0.02"));
  CHECK(c.engine.exam_pass_threshold == 8);
  CHECK(std::filesystem::exists(c.train_texts.at("che")));
}

TEST_CASE("runtime rejects directions without profiles") {
  service::ServiceConfig c;
  c.directions = {{"che", "xho"}};
  try {
    service::build_runtime(c, testing::detector({"che", "rus"}));
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::configuration);
  }
}
