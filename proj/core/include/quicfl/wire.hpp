#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace quicfl {

inline constexpr std::uint16_t kWireVersion = 1;
inline constexpr std::uint16_t kFlagAlg1 = 1;
/// Fixed bytes before the outlier list: magic through outlier_count.
inline constexpr std::size_t kWireHeaderBytes = 72;

struct Outlier {
  std::uint32_t index = 0;
  float value = 0;
  friend bool operator==(const Outlier&, const Outlier&) = default;
};

/// One client's message. Layout on the wire, little-endian:
/// "QFLM" | version u16 | flags u16 | d u64 | d_pad u64 | b u8 | ell u8 |
/// pad u16 | prf_version u32 | table_hash u64 | global_seed u64 |
/// client_seed u64 | norm f64 | outlier_count u64 | (index u32, value f32)* |
/// payload_len u64 | payload.
struct EncodedVector {
  std::uint16_t version = kWireVersion;
  std::uint16_t flags = 0;
  std::uint64_t d = 0;
  std::uint64_t d_pad = 0;
  std::uint8_t b = 1;
  std::uint8_t ell = 0;
  std::uint32_t prf_version = 0;
  std::uint64_t table_hash = 0;
  std::uint64_t global_seed = 0;
  std::uint64_t client_seed = 0;
  double norm = 0;
  std::vector<Outlier> outliers;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const EncodedVector&, const EncodedVector&) = default;
};

std::size_t wire_size(const EncodedVector& msg) noexcept;

/// Total bits on the wire per padded coordinate.
double bits_per_coordinate(const EncodedVector& msg) noexcept;

/// Checks every structural invariant; throws FormatError.
void check_message(const EncodedVector& msg);

std::vector<std::uint8_t> serialize(const EncodedVector& msg);

/// Parses and verifies every field. FormatError kinds: kVersion for an
/// unknown wire or PRF version, kMalformed for anything else.
EncodedVector deserialize(std::span<const std::uint8_t> bytes);

}  // namespace quicfl
