#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "corpusforge/sim/client.hpp"

namespace corpusforge::sim {

// Chance that a translation ends up accepted when it is truly good with
// probability g and each of three verdicts matches the truth with
// probability q. Computed by enumerating the eight verdict outcomes.
double expected_acceptance_rate(double g, double q);
// g*M + (1-g)*(1-M) with M = q^3 + 3q^2(1-q).
double closed_form_acceptance_rate(double g, double q);

enum class CheatMode { none, copy_source, wrong_language, random_fast };
CheatMode parse_cheat_mode(const std::string& s);

struct SimWorkerProfile {
  std::string name = "worker";  // instances are named name-1, name-2, ...
  std::size_t count = 1;
  std::set<std::string> langs;
  bool translates = true;
  bool verifies = false;
  double g = 1.0;  // translation adequacy
  double q = 1.0;  // verdict accuracy
  std::optional<double> exam_accuracy;  // defaults to q
  double translate_median_ms = 45'000;
  double verify_median_ms = 15'000;
  double speed_sigma = 0.35;
  CheatMode cheat = CheatMode::none;
};

struct ExamPoolData {
  std::vector<std::pair<std::string, std::string>> parallel;
  std::vector<std::pair<std::string, std::string>> glossary;
  std::vector<std::string> other_lang;
};

struct SimDirection {
  std::string direction;  // "rus-eng"
  std::vector<std::string> sources;
  std::optional<ExamPoolData> exam;
  std::optional<std::size_t> quota;  // overrides sources_per_direction
};

struct SimConfig {
  std::vector<SimWorkerProfile> workers;
  std::vector<SimDirection> directions;
  // Sentences workers draw their output from, per language.
  std::map<std::string, std::vector<std::string>> language_pools;
  std::size_t sources_per_direction = 100;
  std::uint64_t seed = 1;
  bool concurrent = false;
  std::size_t threads = 8;
};

struct DirectionReport {
  std::string direction;
  std::size_t tasks = 0;
  std::size_t submitted = 0;
  std::size_t auto_rejected = 0;
  std::size_t translated = 0;
  std::size_t fully_verified = 0;
  std::size_t in_corpus = 0;
};

struct SimulationReport {
  std::uint64_t seed = 0;
  std::vector<DirectionReport> directions;
  DirectionReport total;
  double acceptance_rate = 0.0;   // in_corpus / submitted
  double auto_reject_rate = 0.0;  // auto_rejected / submitted
  std::vector<std::string> flagged_workers;
  std::vector<std::string> exam_failures;
  std::vector<std::string> starved_directions;  // translations left without three verdicts
  nlohmann::json cost;
};

// Reads data/sim/<lang>.txt and data/exam/<direction>/ for each direction.
SimConfig load_sim_data(const std::filesystem::path& data_dir, const std::vector<std::string>& directions);

// Worker profiles and run options from JSON:
// {"directions": [...], "workers": [{"name", "count", "langs", "translates",
//  "verifies", "g", "q", "exam_accuracy", "translate_median_ms",
//  "verify_median_ms", "speed_sigma", "cheat"}], "concurrent", "threads"}
void apply_profiles(SimConfig& config, const nlohmann::json& profiles);

// Drives register -> exam -> translate -> verify against a running service.
SimulationReport simulate(const std::string& host, int port, const SimConfig& config,
                          const std::string& requester_token = {});

struct FunnelRow {
  std::size_t translated = 0, fully_verified = 0, in_corpus = 0;
  bool operator==(const FunnelRow&) const = default;
};
struct Funnel {
  std::vector<std::pair<std::string, FunnelRow>> directions;
  FunnelRow total;
  const FunnelRow* find(const std::string& direction) const;
};
Funnel parse_funnel(const nlohmann::json& j);

// Replays a JSONL event log {event, direction, payload} through the API and
// returns the resulting funnel. Malformed fixtures raise ApiError{0,"input"}.
Funnel replay_funnel(ApiClient& client, std::istream& fixture);
Funnel replay_funnel(ApiClient& client, const std::filesystem::path& fixture);

nlohmann::json to_json(const SimulationReport& r);

}  // namespace corpusforge::sim
