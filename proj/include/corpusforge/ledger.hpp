#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "corpusforge/money.hpp"
#include "corpusforge/types.hpp"

namespace corpusforge::ledger {

struct PriceSheet {
  Money per_translation = Money::parse("0.02");
  Money per_verdict_set = Money::parse("0.01");
  std::int64_t verdicts_per_set = 10;
};

enum class CostKind { translation, verification_set };
std::string_view to_string(CostKind k);
CostKind parse_cost_kind(std::string_view s);

struct CostEntry {
  std::uint64_t seq = 0;
  WorkerId worker;
  CostKind kind = CostKind::translation;
  std::int64_t units = 1;
  Money amount;
  Timestamp at = 0;
};

struct CostFilter {
  std::optional<WorkerId> worker;
  std::optional<CostKind> kind;
  std::optional<Timestamp> from;  // inclusive
  std::optional<Timestamp> to;    // exclusive
  bool matches(const CostEntry& e) const;
};

struct CostTotals {
  Money translation;
  Money verification;
  Money grand;
  std::size_t entries = 0;
};

struct VerdictTally {
  std::uint64_t verdicts = 0;
  std::uint64_t sets_booked = 0;
};

// Append-only payment log. Not synchronized; the store serializes access.
class Ledger {
 public:
  explicit Ledger(PriceSheet prices = {}) : prices_(prices) {}

  const PriceSheet& prices() const { return prices_; }
  void set_prices(const PriceSheet& p) { prices_ = p; }

  const CostEntry& record_translation_payment(WorkerId worker, Timestamp at);
  void count_verdict(WorkerId worker);
  // Books one entry per newly completed set of verdicts; remainders carry.
  std::vector<CostEntry> settle_verification_payments(WorkerId worker, Timestamp at);

  CostTotals totals(const CostFilter& filter = {}) const;
  const std::vector<CostEntry>& entries() const { return entries_; }
  const std::map<WorkerId, VerdictTally>& tallies() const { return tallies_; }

  // seq,worker,kind,units,amount,at
  std::string to_csv() const;

  // Restoration hooks used by the store's journal replay.
  void restore_entry(const CostEntry& e);
  void restore_tally(WorkerId worker, VerdictTally tally);

 private:
  PriceSheet prices_;
  std::vector<CostEntry> entries_;
  std::map<WorkerId, VerdictTally> tallies_;
};

// num_languages * sentences_per_language * price_per_sentence, exactly.
Money project_cost(std::int64_t num_languages, std::int64_t sentences_per_language, Money price_per_sentence);

void to_json(nlohmann::json& j, const CostEntry& e);
void from_json(const nlohmann::json& j, CostEntry& e);
void to_json(nlohmann::json& j, const CostTotals& t);

}  // namespace corpusforge::ledger
