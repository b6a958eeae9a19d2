#include "corpusforge/corpus.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <zlib.h>

#include "corpusforge/error.hpp"

namespace corpusforge::corpus {

using store::TaskState;

const FunnelCounts* FunnelStats::find(const std::string& code) const {
  for (const auto& [d, c] : directions)
    if (d.code() == code) return &c;
  return nullptr;
}

FunnelStats funnel_stats(const store::State& state) {
  std::map<std::string, FunnelCounts> by_dir;
  for (const auto& [id, task] : state.tasks) {
    auto& c = by_dir[task.direction.code()];
    switch (task.state) {
      case TaskState::accepted:
        ++c.in_corpus;
        [[fallthrough]];
      case TaskState::rejected:
        ++c.fully_verified;
        [[fallthrough]];
      case TaskState::in_verification:
        ++c.translated;
        break;
      default:
        break;
    }
  }
  FunnelStats stats;
  for (const auto& d : state.directions) {
    const auto c = by_dir[d.code()];
    stats.directions.emplace_back(d, c);
    stats.total.translated += c.translated;
    stats.total.fully_verified += c.fully_verified;
    stats.total.in_corpus += c.in_corpus;
  }
  return stats;
}

FunnelStats funnel_stats(const store::Store& store) {
  return store.read([](const store::State& s) { return funnel_stats(s); });
}

std::string format_table(const FunnelStats& stats) {
  std::vector<std::string> header{"", "Total"};
  for (const auto& [d, c] : stats.directions) header.push_back(d.code());
  auto row = [&](const char* label, auto field) {
    std::vector<std::string> r{label, std::to_string(stats.total.*field)};
    for (const auto& [d, c] : stats.directions) r.push_back(std::to_string(c.*field));
    return r;
  };
  std::vector<std::vector<std::string>> rows{header, row("Translated", &FunnelCounts::translated),
                                             row("Verified", &FunnelCounts::fully_verified),
                                             row("In corpus", &FunnelCounts::in_corpus)};
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& r : rows)
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i == 0) out += fmt::format("{:<{}}", r[i], width[i]);
      else out += fmt::format(" | {:>{}}", r[i], width[i]);
    }
    out += '\n';
  }
  return out;
}

ExportFormat parse_export_format(std::string_view s) {
  if (s == "jsonl") return ExportFormat::jsonl;
  if (s == "tsv") return ExportFormat::tsv;
  fail(ErrorKind::input, "unknown export format '" + std::string(s) + "' (jsonl or tsv)");
}

namespace {

std::string pseudonym(WorkerId w) {
  const auto key = fmt::format("worker:{}", w.value);
  return fmt::format("t{:08x}", static_cast<std::uint32_t>(
                                    crc32(0L, reinterpret_cast<const Bytef*>(key.data()), key.size())));
}

// Tabs and newlines inside a sentence would break the line format.
std::string tsv_field(const std::string& s) {
  std::string out = s;
  std::replace_if(out.begin(), out.end(), [](char c) { return c == '\t' || c == '\n' || c == '\r'; }, ' ');
  return out;
}

}  // namespace

std::string export_corpus(const store::State& state, const Direction& direction, ExportFormat format,
                          bool include_pending) {
  if (!state.has_direction(direction)) fail(ErrorKind::input, "unknown direction " + direction.code());
  std::vector<const store::TranslationTask*> accepted, pending;
  for (const auto& [id, t] : state.tasks) {
    if (t.direction != direction) continue;
    if (t.state == TaskState::accepted) accepted.push_back(&t);
    else if (include_pending && t.state == TaskState::in_verification) pending.push_back(&t);
  }
  std::stable_sort(accepted.begin(), accepted.end(), [](auto* a, auto* b) {
    return std::pair(*a->finalized_at, a->id) < std::pair(*b->finalized_at, b->id);
  });
  std::string out;
  auto emit = [&](const store::TranslationTask& t) {
    const auto& src = state.sources.at(t.source);
    const auto& tr = state.translations.at(*t.translation);
    if (format == ExportFormat::tsv) {
      out += tsv_field(src.text);
      out += '\t';
      out += tsv_field(tr.text);
      out += '\n';
      return;
    }
    nlohmann::json verdicts = nlohmann::json::array();
    for (auto id : state.assignments_by_translation.at(tr.id))
      if (const auto& v = state.assignments.at(id).verdict) verdicts.push_back(to_string(*v));
    nlohmann::json rec = {{"src", src.text},
                          {"tgt", tr.text},
                          {"src_lang", direction.src},
                          {"tgt_lang", direction.tgt},
                          {"verdicts", verdicts},
                          {"translator", pseudonym(tr.worker)},
                          {"submitted_at", tr.submitted_at}};
    if (t.finalized_at) rec["accepted_at"] = *t.finalized_at;
    else rec["status"] = "pending";
    out += rec.dump();
    out += '\n';
  };
  for (auto* t : accepted) emit(*t);
  for (auto* t : pending) emit(*t);
  return out;
}

std::string export_corpus(const store::Store& store, const Direction& direction, ExportFormat format,
                          bool include_pending) {
  return store.read([&](const store::State& s) { return export_corpus(s, direction, format, include_pending); });
}

void to_json(nlohmann::json& j, const FunnelCounts& c) {
  j = {{"translated", c.translated}, {"fully_verified", c.fully_verified}, {"in_corpus", c.in_corpus}};
}

void to_json(nlohmann::json& j, const FunnelStats& s) {
  nlohmann::json dirs = nlohmann::json::array();
  for (const auto& [d, c] : s.directions) {
    nlohmann::json e = c;
    e["direction"] = d.code();
    dirs.push_back(std::move(e));
  }
  j = {{"total", s.total}, {"directions", std::move(dirs)}};
}

}  // namespace corpusforge::corpus
