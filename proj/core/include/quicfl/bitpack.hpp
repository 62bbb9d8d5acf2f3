#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace quicfl {

/// Bytes needed for count messages of b bits.
inline constexpr std::size_t packed_size(std::size_t count, int b) noexcept {
  return (count * static_cast<std::size_t>(b) + 7) / 8;
}

/// Message i occupies bits [i*b, (i+1)*b), least significant bit first.
/// Throws DomainError unless 1 <= b <= 8 and RangeError for a message >= 2^b.
std::vector<std::uint8_t> bitpack(std::span<const std::uint32_t> messages, int b);

/// Inverse of bitpack. Throws FormatError when bytes.size() is not
/// packed_size(count, b).
std::vector<std::uint32_t> bitunpack(std::span<const std::uint8_t> bytes, std::size_t count, int b);

/// Writes one message into a zeroed buffer.
inline void pack_one(std::uint8_t* out, std::size_t i, std::uint32_t v, int b) noexcept {
  const std::size_t bit = i * static_cast<std::size_t>(b);
  const std::size_t byte = bit >> 3;
  const unsigned off = bit & 7;
  out[byte] |= static_cast<std::uint8_t>(v << off);
  if (off + b > 8) out[byte + 1] |= static_cast<std::uint8_t>(v >> (8 - off));
}

inline std::uint32_t unpack_one(const std::uint8_t* in, std::size_t i, int b) noexcept {
  const std::size_t bit = i * static_cast<std::size_t>(b);
  const std::size_t byte = bit >> 3;
  const unsigned off = bit & 7;
  std::uint32_t v = in[byte] >> off;
  if (off + b > 8) v |= static_cast<std::uint32_t>(in[byte + 1]) << (8 - off);
  return v & ((1u << b) - 1);
}

}  // namespace quicfl
