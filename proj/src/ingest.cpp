#include "corpusforge/ingest.hpp"

#include <unordered_map>

#include "corpusforge/error.hpp"
#include "corpusforge/store.hpp"
#include "corpusforge/text.hpp"

namespace corpusforge::ingest {

std::string normalize_sentence(std::string_view input) {
  std::string out;
  out.reserve(input.size());
  bool pending_space = false;
  bool in_digits = false;
  for (char32_t cp : text::decode(input)) {
    if (text::is_space(cp)) {
      pending_space = !out.empty();
      in_digits = false;
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    if (text::is_digit(cp)) {
      if (!in_digits) out.push_back('0');
      in_digits = true;
      continue;
    }
    in_digits = false;
    text::append(out, text::to_lower(cp));
  }
  return out;
}

TemplateSplit filter_templates(std::span<const RawLine> lines, std::size_t max_occurrences) {
  if (max_occurrences < 1) fail(ErrorKind::input, "max_occurrences must be at least 1");
  std::vector<std::string> forms;
  forms.reserve(lines.size());
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& line : lines) {
    forms.push_back(normalize_sentence(line.text));
    ++freq[forms.back()];
  }
  TemplateSplit split;
  std::unordered_map<std::string, bool> seen;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const bool repeated = freq[forms[i]] > max_occurrences;
    if (repeated && seen[forms[i]]) {
      split.flagged.push_back(lines[i]);
    } else {
      split.kept.push_back(lines[i]);
    }
    seen[forms[i]] = true;
  }
  return split;
}

IngestReport ingest(store::Store& store, std::span<const RawLine> lines, const std::string& expected_lang,
                    const langid::Detector& detector, const IngestConfig& config,
                    std::vector<SourceId>* kept_ids) {
  if (!detector.has(expected_lang))
    fail(ErrorKind::configuration, "no language profile loaded for '" + expected_lang + "'");
  if (config.max_occurrences < 1) fail(ErrorKind::configuration, "ingest.max_occurrences must be at least 1");

  IngestReport report;
  report.input_count = lines.size();

  std::vector<RawLine> wellformed;
  for (const auto& line : lines) {
    auto trimmed = text::trim(line.text);
    const auto n = text::length(trimmed);
    if (trimmed.empty() || n < config.min_chars || n > config.max_chars) {
      ++report.dropped_malformed;
      continue;
    }
    wellformed.push_back({std::move(trimmed), line.origin});
  }

  auto split = filter_templates(wellformed, config.max_occurrences);
  report.dropped_template = split.flagged.size();

  // Language detection is pure, so it runs before taking the write lock.
  struct Candidate {
    RawLine line;
    std::string normalized;
    bool in_language;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(split.kept.size());
  for (auto& line : split.kept) {
    auto normalized = normalize_sentence(line.text);
    const auto d = detector.detect(line.text);
    const bool ok = d.confident && d.lang == expected_lang;
    candidates.push_back({std::move(line), std::move(normalized), ok});
  }

  store.write([&](store::Txn& txn) {
    std::unordered_map<std::string, bool> batch;
    for (auto& c : candidates) {
      if (batch.count(c.normalized) || txn.state().has_normalized(expected_lang, c.normalized)) {
        ++report.dropped_duplicate;
        continue;
      }
      batch[c.normalized] = true;
      if (!c.in_language) {
        ++report.dropped_language;
        continue;
      }
      store::SourceSentence s;
      s.id = SourceId{txn.allocate_id()};
      s.text = std::move(c.line.text);
      s.lang = expected_lang;
      s.origin = std::move(c.line.origin);
      s.normalized = std::move(c.normalized);
      s.status = store::SourceStatus::pool;
      txn.put(s);
      if (kept_ids) kept_ids->push_back(s.id);
      ++report.kept;
    }
  });
  return report;
}

void to_json(nlohmann::json& j, const IngestReport& r) {
  j = {{"input_count", r.input_count},           {"kept", r.kept},
       {"dropped_template", r.dropped_template}, {"dropped_duplicate", r.dropped_duplicate},
       {"dropped_language", r.dropped_language}, {"dropped_malformed", r.dropped_malformed}};
}

}  // namespace corpusforge::ingest
