#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace corpusforge {

// Fixed-point currency with four decimal places. Stored as a 128-bit count
// of 1/10000 units so large projections stay exact.
class Money {
 public:
  static constexpr std::int64_t kScale = 10'000;
  // Largest magnitude any amount may reach, in whole currency units.
  static constexpr std::int64_t kMaxUnits = 1'000'000'000'000'000;  // 1e15

  constexpr Money() = default;
  static Money from_ticks(__int128 ticks);
  static Money units(std::int64_t whole);
  // Accepts "12", "0.02", "$1,000.50", "-3.1234"; more than four decimals is an error.
  static Money parse(std::string_view s);

  __int128 ticks() const { return ticks_; }
  // Always four decimals, e.g. "32.5400".
  std::string to_string() const;
  // Rounded-down to cents with thousands separators, e.g. "$7,000,000,000.00".
  std::string display() const;

  Money operator+(Money o) const { return from_ticks(ticks_ + o.ticks_); }
  Money operator-(Money o) const { return from_ticks(ticks_ - o.ticks_); }
  Money& operator+=(Money o) { return *this = *this + o; }
  Money operator*(std::int64_t n) const;

  auto operator<=>(const Money&) const = default;

 private:
  __int128 ticks_ = 0;
};

}  // namespace corpusforge
