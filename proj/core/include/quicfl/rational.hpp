#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace quicfl {

/// Exact positive fraction num/den, used for the exact-send fraction p so
/// that headers and file names carry it without rounding.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 512;

  double value() const noexcept {
    return static_cast<double>(num) / static_cast<double>(den);
  }

  /// "num/den"
  std::string str() const;

  /// Parses "num/den" or a bare integer. Throws DomainError for malformed
  /// text, zero or negative parts.
  static Rational parse(std::string_view text);

  friend bool operator==(const Rational&, const Rational&) = default;
};

}  // namespace quicfl
