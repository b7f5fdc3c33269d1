#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace forge {

/// Exact currency amount in picodollars (1e-12 USD). Token prices quoted
/// per 1k tokens with up to nine decimal places map to an integral number
/// of picodollars per token, so every priced call is exact.
class Money {
 public:
  constexpr Money() = default;
  static constexpr Money from_pico(std::int64_t pico) { return Money(pico); }

  /// Parses "0.60", "$1.25", "12". Throws config-error on malformed input
  /// or more than 12 fractional digits.
  static Money parse(std::string_view text);

  constexpr std::int64_t pico() const { return pico_; }

  /// Fixed-point rendering, trailing zeros trimmed to at least two decimals.
  std::string to_string() const;

  constexpr Money& operator+=(Money o) { pico_ += o.pico_; return *this; }
  friend constexpr Money operator+(Money a, Money b) { return Money(a.pico_ + b.pico_); }
  friend constexpr Money operator-(Money a, Money b) { return Money(a.pico_ - b.pico_); }
  friend constexpr Money operator*(Money a, std::int64_t n) { return Money(a.pico_ * n); }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t pico) : pico_(pico) {}
  std::int64_t pico_ = 0;
};

/// Per-token price derived from a per-1k-token quote. "0.0025" per 1k tokens
/// is 2,500,000 picodollars per token.
struct TokenPrice {
  Money input_per_token;
  Money output_per_token;

  /// Parses a per-1k quote; at most nine fractional digits.
  static Money per_token_from_per_1k(std::string_view per_1k);

  Money cost(std::int64_t input_tokens, std::int64_t output_tokens) const {
    return input_per_token * input_tokens + output_per_token * output_tokens;
  }
};

}  // namespace forge
