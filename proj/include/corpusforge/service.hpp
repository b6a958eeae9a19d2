#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "corpusforge/engine.hpp"
#include "corpusforge/error.hpp"
#include "corpusforge/ingest.hpp"
#include "corpusforge/ledger.hpp"
#include "corpusforge/store.hpp"

namespace httplib { class Server; }

namespace corpusforge::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_path;  // empty: in-memory
  ledger::PriceSheet prices;
  engine::EngineConfig engine;
  double langid_margin = langid::kDefaultMargin;
  std::map<std::string, std::filesystem::path> profiles;     // lang -> saved profile
  std::map<std::string, std::filesystem::path> train_texts;  // lang -> plain text, trained at startup
  bool requester_enabled = true;
  std::string requester_token;  // when set, requester endpoints need it as bearer token
  std::vector<Direction> directions;
  ingest::IngestConfig ingest;
  std::map<std::string, std::filesystem::path> exam_pools;  // direction code -> pool directory
  std::uint64_t exam_seed = 1;
  std::size_t threads = 8;
};

// key = value lines; "[section]" headers prefix the keys that follow.
// Relative paths resolve against the file's directory.
ServiceConfig load_config(const std::filesystem::path& path);
ServiceConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
// Explicit path if given, else $CORPUSFORGE_CONFIG, else none.
std::optional<std::filesystem::path> resolve_config_path(const std::optional<std::string>& explicit_path);

int http_status(ErrorKind kind);

struct Route {
  std::string method;
  std::string path;
  bool requester = false;
  std::string summary;
};
std::vector<Route> route_table();

struct ApiOptions {
  bool requester_enabled = true;
  std::string requester_token;
  ingest::IngestConfig ingest;
  std::size_t threads = 8;
};

// HTTP adapter over one task engine.
class ApiService {
 public:
  ApiService(engine::TaskEngine& engine, ApiOptions options = {});
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  // Binds to host:port (0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  void run();  // blocks until stop()
  void start(const std::string& host = "127.0.0.1", int port = 0);  // background thread
  void stop();
  int port() const { return port_; }

 private:
  void install_routes();

  engine::TaskEngine& engine_;
  ApiOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

// Everything a running service owns, assembled from a config.
struct Runtime {
  std::unique_ptr<store::Store> store;
  std::shared_ptr<const langid::Detector> detector;
  std::unique_ptr<engine::TaskEngine> engine;
};
Runtime build_runtime(const ServiceConfig& config, Clock clock = system_now);
// Same, with profiles supplied by the caller instead of the config.
Runtime build_runtime(const ServiceConfig& config, std::shared_ptr<const langid::Detector> detector,
                      Clock clock = system_now);
ApiOptions api_options(const ServiceConfig& config);

std::shared_ptr<const langid::Detector> load_detector(const ServiceConfig& config);

}  // namespace corpusforge::service
