#include "corpusforge/sim/client.hpp"

#include <httplib.h>

namespace corpusforge::sim {

using nlohmann::json;

ApiClient::ApiClient(std::string host, int port) : http_(std::make_unique<httplib::Client>(host, port)) {
  http_->set_keep_alive(true);
  http_->set_tcp_nodelay(true);
  http_->set_connection_timeout(5);
  http_->set_read_timeout(120);
}

ApiClient::~ApiClient() = default;
ApiClient::ApiClient(ApiClient&&) noexcept = default;
ApiClient& ApiClient::operator=(ApiClient&&) noexcept = default;

json ApiClient::call(const std::string& method, const std::string& path, const std::string& token,
                     const json* body, int* status_out) {
  httplib::Headers headers;
  if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
  httplib::Result res = method == "GET"
                            ? http_->Get(path, headers)
                            : http_->Post(path, headers, body ? body->dump() : std::string(), "application/json");
  if (!res) throw ApiError(0, "environment", "service unreachable: " + httplib::to_string(res.error()));
  if (status_out) *status_out = res->status;
  if (res->status == 204) return nullptr;
  if (res->status >= 400) {
    std::string kind = "http", message = res->body;
    try {
      auto j = json::parse(res->body);
      kind = j.value("error", kind);
      message = j.value("message", message);
    } catch (const json::exception&) {
    }
    throw ApiError(res->status, kind, method + " " + path + ": " + message);
  }
  if (res->get_header_value("Content-Type").rfind("application/json", 0) != 0) return res->body;
  return json::parse(res->body);
}

ApiClient::Session ApiClient::register_worker(const std::string& name, const std::set<std::string>& langs) {
  const json body = {{"name", name}, {"langs", langs}};
  const auto r = call("POST", "/v1/workers", "", &body);
  return {r.at("worker_id").get<std::uint64_t>(), r.at("token").get<std::string>()};
}

json ApiClient::me(const std::string& token) { return call("GET", "/v1/workers/me", token, nullptr); }

std::optional<json> ApiClient::next_task(const std::string& token, const std::string& kind) {
  int status = 0;
  auto r = call("GET", "/v1/tasks/next?kind=" + kind, token, nullptr, &status);
  if (status == 204) return std::nullopt;
  return r;
}

json ApiClient::submit_translation(const std::string& token, std::uint64_t task_id, const std::string& text,
                                   std::int64_t elapsed_ms) {
  const json body = {{"text", text}, {"elapsed_ms", elapsed_ms}};
  return call("POST", "/v1/tasks/" + std::to_string(task_id) + "/translation", token, &body);
}

json ApiClient::submit_verdict(const std::string& token, std::uint64_t assignment_id, const std::string& verdict,
                               std::int64_t elapsed_ms) {
  const json body = {{"verdict", verdict}, {"elapsed_ms", elapsed_ms}};
  return call("POST", "/v1/assignments/" + std::to_string(assignment_id) + "/verdict", token, &body);
}

json ApiClient::exam(const std::string& token, const std::string& direction) {
  return call("GET", "/v1/exam/" + direction, token, nullptr);
}

json ApiClient::answer_exam(const std::string& token, const std::string& direction, const std::string& version,
                            const std::vector<std::string>& answers) {
  const json body = {{"version", version}, {"answers", answers}};
  return call("POST", "/v1/exam/" + direction + "/answers", token, &body);
}

json ApiClient::install_exam(const std::string& direction, const json& body) {
  return call("POST", "/v1/exam/" + direction + "/form", requester_auth(), &body);
}

json ApiClient::upload_sources(const std::string& lang, const std::string& origin,
                               const std::vector<std::string>& lines, const std::optional<std::string>& direction) {
  json body = {{"lang", lang}, {"origin", origin}, {"lines", lines}};
  if (direction) body["direction"] = *direction;
  return call("POST", "/v1/sources", requester_auth(), &body);
}

json ApiClient::funnel() { return call("GET", "/v1/stats/funnel", requester_auth(), nullptr); }

json ApiClient::cost() { return call("GET", "/v1/cost", requester_auth(), nullptr); }

std::string ApiClient::export_corpus(const std::string& direction, const std::string& format) {
  const auto r = call("GET", "/v1/export?direction=" + direction + "&format=" + format, requester_auth(), nullptr);
  return r.is_string() ? r.get<std::string>() : std::string();
}

json ApiClient::clear_flag(const std::string& worker_name) {
  const json body = json::object();
  return call("POST", "/v1/workers/" + worker_name + "/clear", requester_auth(), &body);
}

}  // namespace corpusforge::sim
