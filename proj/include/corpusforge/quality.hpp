#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <json.hpp>

#include "corpusforge/langid.hpp"
#include "corpusforge/types.hpp"

namespace corpusforge::qc {

inline constexpr double kDefaultLengthRatioMax = 3.0;

enum class FailedCheck { language, length, empty };
std::string_view to_string(FailedCheck c);

struct AutoCheckResult {
  bool passed = true;
  std::optional<FailedCheck> failed_check;
  std::optional<std::string> detected_lang;  // set when the detection was confident
  std::optional<double> length_ratio;        // absent when a side is empty
};

struct LengthCheck {
  bool pass = false;
  double ratio = 1.0;
};

// max(a,b)/min(a,b) over whitespace-stripped code point counts. A ratio that
// "exceeds" the maximum fails; the boundary itself passes.
LengthCheck length_ratio_check(std::string_view src, std::string_view tgt,
                               double max_ratio = kDefaultLengthRatioMax);

// Checks run empty -> length -> language. The language check rejects only a
// confident detection of some other language; abstentions pass through.
AutoCheckResult auto_check(std::string_view translation, std::string_view source,
                           const Direction& direction, const langid::Detector& detector,
                           double max_ratio = kDefaultLengthRatioMax);

// Majority of exactly three verdicts.
Decision aggregate_verdicts(std::span<const Verdict> verdicts);

struct Response {
  TaskKind kind = TaskKind::translate;
  std::int64_t elapsed_ms = 0;
};

struct FastThresholds {
  std::int64_t translate_ms = 10'000;
  std::int64_t verify_ms = 3'000;
  std::size_t min_occurrences = 3;
};

struct TrustFlag {
  WorkerId worker;
  std::string reason = "fast_responses";
  std::size_t evidence_count = 0;
  Timestamp flagged_at = 0;
};

std::optional<TrustFlag> flag_fast_responses(WorkerId worker, std::span<const Response> history,
                                             const FastThresholds& thresholds, Timestamp now);

void to_json(nlohmann::json& j, const AutoCheckResult& r);
void from_json(const nlohmann::json& j, AutoCheckResult& r);
void to_json(nlohmann::json& j, const TrustFlag& f);
void from_json(const nlohmann::json& j, TrustFlag& f);

}  // namespace corpusforge::qc
