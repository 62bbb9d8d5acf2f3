#include "quicfl/wire.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "quicfl/bitpack.hpp"
#include "quicfl/error.hpp"
#include "quicfl/prf.hpp"

namespace quicfl {

namespace {

static_assert(std::endian::native == std::endian::little,
              "wire encoding assumes a little-endian host");

constexpr char kMagic[4] = {'Q', 'F', 'L', 'M'};

[[noreturn]] void malformed(const std::string& what) {
  throw FormatError(FormatErrorKind::kMalformed, "wire message: " + what);
}

class Writer {
 public:
  explicit Writer(std::size_t reserve) { buf_.reserve(reserve); }
  template <class T>
  void put(T v) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &v, sizeof(T));
    buf_.insert(buf_.end(), raw, raw + sizeof(T));
  }
  void bytes(std::span<const std::uint8_t> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  template <class T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = b_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) {
    if (b_.size() - pos_ < n) malformed("truncated");
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t wire_size(const EncodedVector& msg) noexcept {
  return kWireHeaderBytes + msg.outliers.size() * 8 + 8 + msg.payload.size();
}

double bits_per_coordinate(const EncodedVector& msg) noexcept {
  return msg.d_pad ? 8.0 * static_cast<double>(wire_size(msg)) / static_cast<double>(msg.d_pad) : 0.0;
}

void check_message(const EncodedVector& msg) {
  if (msg.version != kWireVersion) {
    throw FormatError(FormatErrorKind::kVersion,
                      "unsupported wire version " + std::to_string(msg.version));
  }
  if (msg.prf_version != kPrfVersion) {
    throw FormatError(FormatErrorKind::kVersion,
                      "unsupported PRF version " + std::to_string(msg.prf_version));
  }
  if (msg.flags & ~kFlagAlg1) malformed("unknown flag bits");
  if (msg.d == 0) malformed("d must be positive");
  if (msg.d > (1ULL << 32)) malformed("d exceeds the 32-bit index range");
  std::uint64_t pad = 1;
  while (pad < msg.d) pad <<= 1;
  if (msg.d_pad != pad) malformed("d_pad is not the next power of two above d");
  if (msg.b < 1 || msg.b > 8) malformed("b must lie in 1..8");
  if (msg.ell > 8) malformed("ell must lie in 0..8");
  if (!(msg.norm >= 0) || !std::isfinite(msg.norm)) malformed("norm must be finite and >= 0");
  if (msg.payload.size() != packed_size(msg.d_pad, msg.b)) malformed("payload length mismatch");
  for (std::size_t k = 0; k < msg.outliers.size(); ++k) {
    if (msg.outliers[k].index >= msg.d_pad) malformed("outlier index out of range");
    if (k && msg.outliers[k].index <= msg.outliers[k - 1].index) {
      malformed("outlier indices must be strictly increasing");
    }
    if (!std::isfinite(msg.outliers[k].value)) malformed("outlier value is not finite");
  }
  if (msg.norm == 0) {
    if (!msg.outliers.empty()) malformed("zero message carries outliers");
    for (auto byte : msg.payload)
      if (byte) malformed("zero message carries a nonzero payload");
  }
}

std::vector<std::uint8_t> serialize(const EncodedVector& msg) {
  check_message(msg);
  Writer w(wire_size(msg));
  for (char c : kMagic) w.put(static_cast<std::uint8_t>(c));
  w.put(msg.version);
  w.put(msg.flags);
  w.put(msg.d);
  w.put(msg.d_pad);
  w.put(msg.b);
  w.put(msg.ell);
  w.put(std::uint16_t{0});
  w.put(msg.prf_version);
  w.put(msg.table_hash);
  w.put(msg.global_seed);
  w.put(msg.client_seed);
  w.put(msg.norm);
  w.put(static_cast<std::uint64_t>(msg.outliers.size()));
  for (const auto& o : msg.outliers) {
    w.put(o.index);
    w.put(o.value);
  }
  w.put(static_cast<std::uint64_t>(msg.payload.size()));
  w.bytes(msg.payload);
  return w.take();
}

EncodedVector deserialize(std::span<const std::uint8_t> bytes) {
  Reader rd(bytes);
  auto magic = rd.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) malformed("bad magic");
  EncodedVector msg;
  msg.version = rd.get<std::uint16_t>();
  if (msg.version != kWireVersion) {
    throw FormatError(FormatErrorKind::kVersion,
                      "unsupported wire version " + std::to_string(msg.version));
  }
  msg.flags = rd.get<std::uint16_t>();
  msg.d = rd.get<std::uint64_t>();
  msg.d_pad = rd.get<std::uint64_t>();
  msg.b = rd.get<std::uint8_t>();
  msg.ell = rd.get<std::uint8_t>();
  if (rd.get<std::uint16_t>() != 0) malformed("reserved field is nonzero");
  msg.prf_version = rd.get<std::uint32_t>();
  msg.table_hash = rd.get<std::uint64_t>();
  msg.global_seed = rd.get<std::uint64_t>();
  msg.client_seed = rd.get<std::uint64_t>();
  msg.norm = rd.get<double>();
  const auto count = rd.get<std::uint64_t>();
  if (count > rd.remaining() / 8) malformed("outlier count exceeds message size");
  msg.outliers.resize(count);
  for (auto& o : msg.outliers) {
    o.index = rd.get<std::uint32_t>();
    o.value = rd.get<float>();
  }
  const auto len = rd.get<std::uint64_t>();
  if (len != rd.remaining()) malformed("payload length does not match the remaining bytes");
  auto payload = rd.bytes(len);
  msg.payload.assign(payload.begin(), payload.end());
  check_message(msg);
  return msg;
}

}  // namespace quicfl
