#include "forge/money.hpp"

#include <cctype>

#include "forge/error.hpp"
#include "forge/util.hpp"

namespace forge {

namespace {

// Parses a non-negative decimal into an integer scaled by 10^scale.
std::int64_t parse_scaled(std::string_view text, int scale) {
  auto s = trim(text);
  if (!s.empty() && s.front() == '$') s.remove_prefix(1);
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  if (s.empty()) throw Error(Errc::config_error, "empty amount");
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_dot = false;
  bool any_digit = false;
  for (char c : s) {
    if (c == '.') {
      if (seen_dot) throw Error(Errc::config_error, "malformed amount: " + std::string(text));
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw Error(Errc::config_error, "malformed amount: " + std::string(text));
    }
    any_digit = true;
    if (seen_dot) {
      if (++frac_digits > scale) {
        throw Error(Errc::config_error, "too many decimal places: " + std::string(text));
      }
      frac = frac * 10 + (c - '0');
    } else {
      whole = whole * 10 + (c - '0');
      if (whole > 9'000'000) throw Error(Errc::config_error, "amount too large: " + std::string(text));
    }
  }
  if (!any_digit) throw Error(Errc::config_error, "malformed amount: " + std::string(text));
  std::int64_t unit = 1;
  for (int i = 0; i < scale; ++i) unit *= 10;
  for (int i = frac_digits; i < scale; ++i) frac *= 10;
  std::int64_t v = whole * unit + frac;
  return negative ? -v : v;
}

}  // namespace

Money Money::parse(std::string_view text) { return Money(parse_scaled(text, 12)); }

std::string Money::to_string() const {
  std::int64_t v = pico_ < 0 ? -pico_ : pico_;
  std::string whole = std::to_string(v / 1'000'000'000'000LL);
  std::string frac = std::to_string(v % 1'000'000'000'000LL);
  frac.insert(0, 12 - frac.size(), '0');
  while (frac.size() > 2 && frac.back() == '0') frac.pop_back();
  return (pico_ < 0 ? "-" : "") + whole + "." + frac;
}

Money TokenPrice::per_token_from_per_1k(std::string_view per_1k) {
  // dollars-per-1k scaled by 1e9 is picodollars per token
  return Money::from_pico(parse_scaled(per_1k, 9));
}

}  // namespace forge
