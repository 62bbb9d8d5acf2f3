#include "quicfl/bitpack.hpp"

#include <string>

#include "quicfl/error.hpp"

namespace quicfl {

std::vector<std::uint8_t> bitpack(std::span<const std::uint32_t> messages, int b) {
  if (b < 1 || b > 8) throw DomainError("bit width must lie in 1..8");
  std::vector<std::uint8_t> out(packed_size(messages.size(), b), 0);
  const std::uint32_t limit = 1u << b;
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (messages[i] >= limit) {
      throw RangeError("message " + std::to_string(messages[i]) + " at index " +
                       std::to_string(i) + " does not fit in " + std::to_string(b) + " bits");
    }
    pack_one(out.data(), i, messages[i], b);
  }
  return out;
}

std::vector<std::uint32_t> bitunpack(std::span<const std::uint8_t> bytes, std::size_t count, int b) {
  if (b < 1 || b > 8) throw DomainError("bit width must lie in 1..8");
  if (bytes.size() != packed_size(count, b)) {
    throw FormatError(FormatErrorKind::kMalformed, "packed payload has " +
                                                       std::to_string(bytes.size()) +
                                                       " bytes, expected " +
                                                       std::to_string(packed_size(count, b)));
  }
  std::vector<std::uint32_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = unpack_one(bytes.data(), i, b);
  return out;
}

}  // namespace quicfl
