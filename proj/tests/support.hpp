#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpusforge/langid.hpp"
#include "corpusforge/service.hpp"
#include "corpusforge/types.hpp"

#ifndef CORPUSFORGE_DATA_DIR
#define CORPUSFORGE_DATA_DIR "data"
#endif

namespace testing {

inline std::filesystem::path data_dir() { return CORPUSFORGE_DATA_DIR; }

inline std::vector<std::string> read_lines(const std::filesystem::path& p, std::size_t limit = SIZE_MAX) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::vector<std::string> lines;
  for (std::string line; lines.size() < limit && std::getline(in, line);)
    if (!line.empty()) lines.push_back(std::move(line));
  return lines;
}

// Profiles trained once per process from data/langid/train.
inline std::shared_ptr<const corpusforge::langid::LangProfile> profile(const std::string& lang) {
  static std::mutex m;
  static std::map<std::string, std::shared_ptr<const corpusforge::langid::LangProfile>> cache;
  std::lock_guard lock(m);
  auto& p = cache[lang];
  if (!p) {
    const auto lines = read_lines(data_dir() / "langid" / "train" / (lang + ".txt"));
    p = std::make_shared<const corpusforge::langid::LangProfile>(corpusforge::langid::train_profile(lines, lang));
  }
  return p;
}

inline std::shared_ptr<const corpusforge::langid::Detector> detector(const std::vector<std::string>& langs) {
  std::vector<std::shared_ptr<const corpusforge::langid::LangProfile>> ps;
  for (const auto& l : langs) ps.push_back(profile(l));
  return std::make_shared<const corpusforge::langid::Detector>(std::move(ps), corpusforge::langid::kDefaultMargin);
}

inline const std::vector<std::string>& all_languages() {
  static const std::vector<std::string> langs = {"ara", "che", "deu", "eng", "fuv", "ind", "rus", "spa"};
  return langs;
}

inline std::filesystem::path fixture_path() { return data_dir() / "fixtures" / "table1_replay.jsonl"; }

// (source, translation) pairs from the replay fixture; both sides are known
// to pass ingestion and the automatic checks under the seed profiles.
inline std::vector<std::pair<std::string, std::string>> fixture_pairs(const std::string& direction) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& line : read_lines(fixture_path())) {
    const auto ev = nlohmann::json::parse(line);
    if (ev.at("event") == "translate" && ev.at("direction") == direction)
      out.emplace_back(ev.at("payload").at("source"), ev.at("payload").at("text"));
  }
  return out;
}

struct ManualClock {
  std::shared_ptr<std::atomic<corpusforge::Timestamp>> now =
      std::make_shared<std::atomic<corpusforge::Timestamp>>(1'700'000'000'000);
  corpusforge::Clock clock() const {
    auto n = now;
    return [n] { return n->load(); };
  }
  void advance(corpusforge::Timestamp ms) { *now += ms; }
};

// A service on an ephemeral port over its own runtime.
struct LiveService {
  corpusforge::service::Runtime runtime;
  std::unique_ptr<corpusforge::service::ApiService> api;
  std::string host = "127.0.0.1";
  int port = 0;

  LiveService(const corpusforge::service::ServiceConfig& config,
              std::shared_ptr<const corpusforge::langid::Detector> detector,
              corpusforge::Clock clock = corpusforge::system_now) {
    runtime = corpusforge::service::build_runtime(config, std::move(detector), std::move(clock));
    api = std::make_unique<corpusforge::service::ApiService>(*runtime.engine,
                                                             corpusforge::service::api_options(config));
    api->start(host, 0);
    port = api->port();
  }
  ~LiveService() { api->stop(); }
};

}  // namespace testing
