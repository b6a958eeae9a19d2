#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace httplib { class Client; }

namespace corpusforge::sim {

// Failure talking to the service. status is 0 when no HTTP response arrived.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string kind, const std::string& message)
      : std::runtime_error(message), status_(status), kind_(std::move(kind)) {}
  int status() const { return status_; }
  const std::string& kind() const { return kind_; }

 private:
  int status_;
  std::string kind_;
};

// Thin blocking client for the v1 API. One instance per thread.
class ApiClient {
 public:
  ApiClient(std::string host, int port);
  ~ApiClient();
  ApiClient(ApiClient&&) noexcept;
  ApiClient& operator=(ApiClient&&) noexcept;

  void set_requester_token(std::string token) { requester_token_ = std::move(token); }

  struct Session {
    std::uint64_t worker_id = 0;
    std::string token;
  };
  Session register_worker(const std::string& name, const std::set<std::string>& langs);
  nlohmann::json me(const std::string& token);
  // Empty when the service answers 204.
  std::optional<nlohmann::json> next_task(const std::string& token, const std::string& kind);
  nlohmann::json submit_translation(const std::string& token, std::uint64_t task_id, const std::string& text,
                                    std::int64_t elapsed_ms);
  nlohmann::json submit_verdict(const std::string& token, std::uint64_t assignment_id, const std::string& verdict,
                                std::int64_t elapsed_ms);
  nlohmann::json exam(const std::string& token, const std::string& direction);
  nlohmann::json answer_exam(const std::string& token, const std::string& direction, const std::string& version,
                             const std::vector<std::string>& answers);

  nlohmann::json install_exam(const std::string& direction, const nlohmann::json& body);
  nlohmann::json upload_sources(const std::string& lang, const std::string& origin,
                                const std::vector<std::string>& lines, const std::optional<std::string>& direction);
  nlohmann::json funnel();
  nlohmann::json cost();
  std::string export_corpus(const std::string& direction, const std::string& format);
  nlohmann::json clear_flag(const std::string& worker_name);

 private:
  nlohmann::json call(const std::string& method, const std::string& path, const std::string& token,
                      const nlohmann::json* body, int* status_out = nullptr);
  std::string requester_auth() const { return requester_token_; }

  std::unique_ptr<httplib::Client> http_;
  std::string requester_token_;
};

}  // namespace corpusforge::sim
