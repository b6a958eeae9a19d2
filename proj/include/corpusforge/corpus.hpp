#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "corpusforge/store.hpp"
#include "corpusforge/types.hpp"

namespace corpusforge::corpus {

struct FunnelCounts {
  std::size_t translated = 0;
  std::size_t fully_verified = 0;
  std::size_t in_corpus = 0;
  bool operator==(const FunnelCounts&) const = default;
};

struct FunnelStats {
  std::vector<std::pair<Direction, FunnelCounts>> directions;  // registration order
  FunnelCounts total;

  const FunnelCounts* find(const std::string& direction_code) const;
  bool operator==(const FunnelStats&) const = default;
};

// translated: passed auto-check and entered verification; fully_verified:
// all three verdicts in; in_corpus: accepted.
FunnelStats funnel_stats(const store::State& state);
FunnelStats funnel_stats(const store::Store& store);

// Table-shaped text: one row per stage, Total then one column per direction.
std::string format_table(const FunnelStats& stats);

enum class ExportFormat { jsonl, tsv };
ExportFormat parse_export_format(std::string_view s);

// Accepted translations ordered by acceptance time then task id; pending
// (in verification) ones follow when requested.
std::string export_corpus(const store::State& state, const Direction& direction, ExportFormat format,
                          bool include_pending = false);
std::string export_corpus(const store::Store& store, const Direction& direction, ExportFormat format,
                          bool include_pending = false);

void to_json(nlohmann::json& j, const FunnelCounts& c);
void to_json(nlohmann::json& j, const FunnelStats& s);

}  // namespace corpusforge::corpus
