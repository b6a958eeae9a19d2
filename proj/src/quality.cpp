#include "corpusforge/quality.hpp"

#include <algorithm>

#include "corpusforge/error.hpp"
#include "corpusforge/text.hpp"

namespace corpusforge::qc {

std::string_view to_string(FailedCheck c) {
  switch (c) {
    case FailedCheck::language: return "language";
    case FailedCheck::length: return "length";
    case FailedCheck::empty: return "empty";
  }
  return "unknown";
}

LengthCheck length_ratio_check(std::string_view src, std::string_view tgt, double max_ratio) {
  const auto a = text::count_non_space(src);
  const auto b = text::count_non_space(tgt);
  if (a == 0 || b == 0) fail(ErrorKind::input, "length ratio needs two non-empty texts");
  const double ratio = static_cast<double>(std::max(a, b)) / static_cast<double>(std::min(a, b));
  return {ratio <= max_ratio, ratio};
}

AutoCheckResult auto_check(std::string_view translation, std::string_view source,
                           const Direction& direction, const langid::Detector& detector,
                           double max_ratio) {
  if (!detector.has(direction.src) || !detector.has(direction.tgt))
    fail(ErrorKind::configuration, "no language profiles loaded for " + direction.code());

  AutoCheckResult r;
  if (text::count_non_space(translation) == 0 || text::count_non_space(source) == 0) {
    r.passed = false;
    r.failed_check = FailedCheck::empty;
    return r;
  }
  const auto len = length_ratio_check(source, translation, max_ratio);
  r.length_ratio = len.ratio;
  if (!len.pass) {
    r.passed = false;
    r.failed_check = FailedCheck::length;
    return r;
  }
  const auto d = detector.detect(translation);
  if (d.confident) {
    r.detected_lang = d.lang;
    if (d.lang != direction.tgt) {
      r.passed = false;
      r.failed_check = FailedCheck::language;
    }
  }
  return r;
}

Decision aggregate_verdicts(std::span<const Verdict> verdicts) {
  if (verdicts.size() != 3)
    fail(ErrorKind::input, "majority vote needs exactly 3 verdicts, got " + std::to_string(verdicts.size()));
  const auto good = std::count(verdicts.begin(), verdicts.end(), Verdict::good);
  return good >= 2 ? Decision::accepted : Decision::rejected;
}

std::optional<TrustFlag> flag_fast_responses(WorkerId worker, std::span<const Response> history,
                                             const FastThresholds& thresholds, Timestamp now) {
  std::size_t fast = 0;
  for (const auto& r : history) {
    const auto limit = r.kind == TaskKind::translate ? thresholds.translate_ms : thresholds.verify_ms;
    if (r.elapsed_ms < limit) ++fast;
  }
  if (fast == 0 || fast < thresholds.min_occurrences) return std::nullopt;
  return TrustFlag{worker, "fast_responses", fast, now};
}

void to_json(nlohmann::json& j, const AutoCheckResult& r) {
  j = {{"passed", r.passed}};
  if (r.failed_check) j["failed_check"] = to_string(*r.failed_check);
  if (r.detected_lang) j["detected_lang"] = *r.detected_lang;
  if (r.length_ratio) j["length_ratio"] = *r.length_ratio;
}
void from_json(const nlohmann::json& j, AutoCheckResult& r) {
  r.passed = j.at("passed").get<bool>();
  r.failed_check.reset();
  if (j.contains("failed_check")) {
    const auto f = j["failed_check"].get<std::string>();
    if (f == "language") r.failed_check = FailedCheck::language;
    else if (f == "length") r.failed_check = FailedCheck::length;
    else if (f == "empty") r.failed_check = FailedCheck::empty;
    else fail(ErrorKind::integrity, "unknown failed check '" + f + "'");
  }
  r.detected_lang.reset();
  if (j.contains("detected_lang")) r.detected_lang = j["detected_lang"].get<std::string>();
  r.length_ratio.reset();
  if (j.contains("length_ratio")) r.length_ratio = j["length_ratio"].get<double>();
}

void to_json(nlohmann::json& j, const TrustFlag& f) {
  j = {{"worker", f.worker}, {"reason", f.reason}, {"evidence_count", f.evidence_count},
       {"flagged_at", f.flagged_at}};
}
void from_json(const nlohmann::json& j, TrustFlag& f) {
  f.worker = j.at("worker").get<WorkerId>();
  f.reason = j.at("reason").get<std::string>();
  f.evidence_count = j.at("evidence_count").get<std::size_t>();
  f.flagged_at = j.at("flagged_at").get<Timestamp>();
}

}  // namespace corpusforge::qc
