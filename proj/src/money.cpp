#include "corpusforge/money.hpp"

#include <algorithm>

#include "corpusforge/error.hpp"

namespace corpusforge {

namespace {

constexpr __int128 kMaxTicks = static_cast<__int128>(Money::kMaxUnits) * Money::kScale;

std::string digits(__int128 v) {
  if (v == 0) return "0";
  std::string s;
  while (v > 0) {
    s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(s.begin(), s.end());
  return s;
}

}  // namespace

Money Money::from_ticks(__int128 ticks) {
  if (ticks > kMaxTicks || ticks < -kMaxTicks) fail(ErrorKind::range, "amount exceeds 10^15 currency units");
  Money m;
  m.ticks_ = ticks;
  return m;
}

Money Money::units(std::int64_t whole) { return from_ticks(static_cast<__int128>(whole) * kScale); }

Money Money::parse(std::string_view s) {
  std::string_view in = s;
  bool negative = false;
  if (!in.empty() && (in.front() == '-' || in.front() == '+')) {
    negative = in.front() == '-';
    in.remove_prefix(1);
  }
  if (!in.empty() && in.front() == '$') in.remove_prefix(1);
  __int128 whole = 0, frac = 0;
  int frac_digits = 0;
  bool seen_digit = false, in_frac = false;
  for (char c : in) {
    if (c == ',' && !in_frac) continue;
    if (c == '.' && !in_frac) {
      in_frac = true;
      continue;
    }
    if (c < '0' || c > '9') fail(ErrorKind::input, "malformed amount '" + std::string(s) + "'");
    seen_digit = true;
    if (in_frac) {
      if (++frac_digits > 4) fail(ErrorKind::input, "amount '" + std::string(s) + "' has more than 4 decimals");
      frac = frac * 10 + (c - '0');
    } else {
      whole = whole * 10 + (c - '0');
      if (whole > Money::kMaxUnits) fail(ErrorKind::range, "amount exceeds 10^15 currency units");
    }
  }
  if (!seen_digit) fail(ErrorKind::input, "malformed amount '" + std::string(s) + "'");
  for (int i = frac_digits; i < 4; ++i) frac *= 10;
  const __int128 t = whole * kScale + frac;
  return from_ticks(negative ? -t : t);
}

std::string Money::to_string() const {
  const __int128 mag = ticks_ < 0 ? -ticks_ : ticks_;
  std::string frac = digits(mag % kScale);
  frac.insert(0, 4 - frac.size(), '0');
  return (ticks_ < 0 ? "-" : "") + digits(mag / kScale) + "." + frac;
}

std::string Money::display() const {
  const __int128 mag = ticks_ < 0 ? -ticks_ : ticks_;
  std::string whole = digits(mag / kScale);
  for (int i = static_cast<int>(whole.size()) - 3; i > 0; i -= 3) whole.insert(static_cast<std::size_t>(i), ",");
  std::string cents = digits((mag % kScale) / 100);
  cents.insert(0, 2 - cents.size(), '0');
  return (ticks_ < 0 ? "-$" : "$") + whole + "." + cents;
}

Money Money::operator*(std::int64_t n) const {
  const __int128 limit = n == 0 ? kMaxTicks : kMaxTicks / (n < 0 ? -static_cast<__int128>(n) : n);
  const __int128 mag = ticks_ < 0 ? -ticks_ : ticks_;
  if (mag > limit) fail(ErrorKind::range, "amount exceeds 10^15 currency units");
  return from_ticks(ticks_ * n);
}

}  // namespace corpusforge
