#include "corpusforge/ledger.hpp"

#include <sstream>

#include "corpusforge/error.hpp"

namespace corpusforge::ledger {

std::string_view to_string(CostKind k) {
  return k == CostKind::translation ? "translation" : "verification_set";
}

CostKind parse_cost_kind(std::string_view s) {
  if (s == "translation") return CostKind::translation;
  if (s == "verification_set" || s == "verification") return CostKind::verification_set;
  fail(ErrorKind::input, "unknown cost kind '" + std::string(s) + "'");
}

bool CostFilter::matches(const CostEntry& e) const {
  if (worker && e.worker != *worker) return false;
  if (kind && e.kind != *kind) return false;
  if (from && e.at < *from) return false;
  if (to && e.at >= *to) return false;
  return true;
}

const CostEntry& Ledger::record_translation_payment(WorkerId worker, Timestamp at) {
  CostEntry e{entries_.size() + 1, worker, CostKind::translation, 1, prices_.per_translation, at};
  entries_.push_back(e);
  return entries_.back();
}

void Ledger::count_verdict(WorkerId worker) { ++tallies_[worker].verdicts; }

std::vector<CostEntry> Ledger::settle_verification_payments(WorkerId worker, Timestamp at) {
  std::vector<CostEntry> booked;
  auto& tally = tallies_[worker];
  const auto per_set = static_cast<std::uint64_t>(prices_.verdicts_per_set);
  while ((tally.sets_booked + 1) * per_set <= tally.verdicts) {
    ++tally.sets_booked;
    entries_.push_back({entries_.size() + 1, worker, CostKind::verification_set, 1, prices_.per_verdict_set, at});
    booked.push_back(entries_.back());
  }
  return booked;
}

CostTotals Ledger::totals(const CostFilter& filter) const {
  CostTotals t;
  for (const auto& e : entries_) {
    if (!filter.matches(e)) continue;
    (e.kind == CostKind::translation ? t.translation : t.verification) += e.amount;
    ++t.entries;
  }
  t.grand = t.translation + t.verification;
  return t;
}

std::string Ledger::to_csv() const {
  std::ostringstream out;
  out << "seq,worker,kind,units,amount,at\n";
  for (const auto& e : entries_)
    out << e.seq << ',' << e.worker.value << ',' << to_string(e.kind) << ',' << e.units << ','
        << e.amount.to_string() << ',' << e.at << '\n';
  return out.str();
}

void Ledger::restore_entry(const CostEntry& e) {
  if (e.seq != entries_.size() + 1) fail(ErrorKind::integrity, "ledger entries out of sequence");
  entries_.push_back(e);
}

void Ledger::restore_tally(WorkerId worker, VerdictTally tally) { tallies_[worker] = tally; }

Money project_cost(std::int64_t num_languages, std::int64_t sentences_per_language, Money price_per_sentence) {
  if (num_languages < 0 || sentences_per_language < 0 || price_per_sentence < Money{})
    fail(ErrorKind::input, "cost projection inputs must be non-negative");
  const __int128 sentences = static_cast<__int128>(num_languages) * sentences_per_language;
  if (sentences == 0 || price_per_sentence == Money{}) return Money{};
  const __int128 limit = static_cast<__int128>(Money::kMaxUnits) * Money::kScale;
  if (sentences > limit || price_per_sentence.ticks() > limit / sentences)
    fail(ErrorKind::range, "projected cost exceeds 10^15 currency units");
  return Money::from_ticks(sentences * price_per_sentence.ticks());
}

void to_json(nlohmann::json& j, const CostEntry& e) {
  j = {{"seq", e.seq},       {"worker", e.worker},
       {"kind", to_string(e.kind)}, {"units", e.units},
       {"amount", e.amount.to_string()}, {"at", e.at}};
}

void from_json(const nlohmann::json& j, CostEntry& e) {
  e.seq = j.at("seq").get<std::uint64_t>();
  e.worker = j.at("worker").get<WorkerId>();
  e.kind = parse_cost_kind(j.at("kind").get<std::string>());
  e.units = j.at("units").get<std::int64_t>();
  e.amount = Money::parse(j.at("amount").get<std::string>());
  e.at = j.at("at").get<Timestamp>();
}

void to_json(nlohmann::json& j, const CostTotals& t) {
  j = {{"translation", t.translation.to_string()},
       {"verification", t.verification.to_string()},
       {"total", t.grand.to_string()},
       {"entries", t.entries}};
}

}  // namespace corpusforge::ledger
