#include <fstream>
#include <map>

#include "corpusforge/sim/sim.hpp"

namespace corpusforge::sim {

using nlohmann::json;

namespace {

[[noreturn]] void bad_fixture(std::size_t line, const std::string& what) {
  throw ApiError(0, "input", "fixture line " + std::to_string(line) + ": " + what);
}

}  // namespace

Funnel replay_funnel(ApiClient& client, std::istream& in) {
  std::map<std::string, std::string> tokens;
  std::size_t lineno = 0;
  auto token_of = [&](const json& payload) -> const std::string& {
    const auto name = payload.at("worker").get<std::string>();
    auto it = tokens.find(name);
    if (it == tokens.end()) bad_fixture(lineno, "worker '" + name + "' was never registered");
    return it->second;
  };

  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json ev;
    try {
      ev = json::parse(line);
    } catch (const json::exception& e) {
      bad_fixture(lineno, std::string("not JSON: ") + e.what());
    }
    try {
      if (!ev.is_object() || !ev.contains("event") || !ev.at("event").is_string())
        bad_fixture(lineno, "missing event type");
      const auto type = ev.at("event").get<std::string>();
      const json payload = ev.value("payload", json::object());
      const std::string direction = ev.value("direction", json()).is_string() ? ev.at("direction").get<std::string>() : "";
      auto need_direction = [&] {
        if (direction.empty()) bad_fixture(lineno, type + " event needs a direction");
      };

      if (type == "meta") {
        continue;
      } else if (type == "worker") {
        const auto name = payload.at("name").get<std::string>();
        tokens[name] = client.register_worker(name, payload.at("langs").get<std::set<std::string>>()).token;
      } else if (type == "exam_setup") {
        need_direction();
        client.install_exam(direction, {{"form", payload.at("form")}});
      } else if (type == "exam") {
        need_direction();
        const auto& token = token_of(payload);
        const auto version = payload.contains("version") ? payload.at("version").get<std::string>()
                                                         : client.exam(token, direction).at("version").get<std::string>();
        const auto result = client.answer_exam(token, direction, version,
                                               payload.at("answers").get<std::vector<std::string>>());
        if (payload.contains("expect_passed") && result.at("passed") != payload.at("expect_passed"))
          bad_fixture(lineno, "exam result differs from the fixture");
      } else if (type == "source") {
        need_direction();
        const auto lines = payload.at("lines").get<std::vector<std::string>>();
        const auto r = client.upload_sources(payload.at("lang").get<std::string>(),
                                             payload.value("origin", std::string("fixture")), lines, direction);
        if (r.at("tasks_created").get<std::size_t>() != lines.size())
          bad_fixture(lineno, "only " + r.at("tasks_created").dump() + " of " + std::to_string(lines.size()) +
                                  " source lines were ingested: " + r.at("report").dump());
      } else if (type == "translate") {
        need_direction();
        const auto& token = token_of(payload);
        const auto task = client.next_task(token, "translate");
        if (!task) bad_fixture(lineno, "no translation task was offered");
        if (task->at("direction") != direction || task->at("source") != payload.at("source"))
          bad_fixture(lineno, "offered task differs from the fixture: " + task->at("source").dump());
        const auto out = client.submit_translation(token, task->at("task_id"), payload.at("text"),
                                                   payload.at("elapsed_ms").get<std::int64_t>());
        if (payload.contains("expect") && out.at("outcome") != payload.at("expect"))
          bad_fixture(lineno, "submission outcome " + out.dump() + " differs from the fixture");
      } else if (type == "verdict") {
        need_direction();
        const auto& token = token_of(payload);
        const auto task = client.next_task(token, "verify");
        if (!task) bad_fixture(lineno, "no verification was offered");
        if (task->at("direction") != direction || task->at("source") != payload.at("source") ||
            task->at("translation") != payload.at("translation"))
          bad_fixture(lineno, "offered verification differs from the fixture");
        client.submit_verdict(token, task->at("assignment_id"), payload.at("verdict"),
                              payload.at("elapsed_ms").get<std::int64_t>());
      } else {
        bad_fixture(lineno, "unknown event '" + type + "'");
      }
    } catch (const json::exception& e) {
      bad_fixture(lineno, std::string("malformed payload: ") + e.what());
    }
  }
  return parse_funnel(client.funnel());
}

Funnel replay_funnel(ApiClient& client, const std::filesystem::path& fixture) {
  std::ifstream in(fixture);
  if (!in) throw ApiError(0, "input", "cannot read fixture " + fixture.string());
  return replay_funnel(client, in);
}

}  // namespace corpusforge::sim
