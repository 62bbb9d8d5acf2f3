#include "quicfl/rational.hpp"

#include <charconv>

#include "quicfl/error.hpp"

namespace quicfl {

namespace {

std::int64_t parse_part(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw DomainError("malformed rational '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

std::string Rational::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::parse(std::string_view text) {
  Rational r;
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    r.num = parse_part(text, text);
    r.den = 1;
  } else {
    r.num = parse_part(text.substr(0, slash), text);
    r.den = parse_part(text.substr(slash + 1), text);
  }
  if (r.num <= 0 || r.den <= 0) {
    throw DomainError("rational '" + std::string(text) + "' must be positive");
  }
  return r;
}

}  // namespace quicfl
