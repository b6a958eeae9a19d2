#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "corpusforge/langid.hpp"
#include "corpusforge/types.hpp"

namespace corpusforge::store { class Store; }

namespace corpusforge::ingest {

struct RawLine {
  std::string text;
  std::string origin;
};

struct IngestConfig {
  std::size_t min_chars = 15;
  std::size_t max_chars = 500;
  std::size_t max_occurrences = 3;
};

struct IngestReport {
  std::size_t input_count = 0;
  std::size_t kept = 0;
  std::size_t dropped_template = 0;
  std::size_t dropped_duplicate = 0;
  std::size_t dropped_language = 0;
  std::size_t dropped_malformed = 0;
};

// Trimmed, whitespace-collapsed, lowercased; every maximal digit run becomes "0".
std::string normalize_sentence(std::string_view text);

struct TemplateSplit {
  std::vector<RawLine> kept;
  std::vector<RawLine> flagged;
};

// Lines whose normalized form occurs more than max_occurrences times are
// flagged, except the first occurrence.
TemplateSplit filter_templates(std::span<const RawLine> lines, std::size_t max_occurrences);

// Malformed -> template -> duplicate -> language, then survivors go to the
// pool. Ids of stored sentences are appended to kept_ids when given.
IngestReport ingest(store::Store& store, std::span<const RawLine> lines, const std::string& expected_lang,
                    const langid::Detector& detector, const IngestConfig& config = {},
                    std::vector<SourceId>* kept_ids = nullptr);

void to_json(nlohmann::json& j, const IngestReport& r);

}  // namespace corpusforge::ingest
