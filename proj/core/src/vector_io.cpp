#include "quicfl/vector_io.hpp"

#include <cstring>
#include <fstream>
#include <iterator>

#include "quicfl/error.hpp"

namespace quicfl {

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_vector_file(const std::filesystem::path& path, std::span<const double> v) {
  std::vector<std::uint8_t> bytes(8 + 4 * v.size());
  const std::uint64_t n = v.size();
  std::memcpy(bytes.data(), &n, 8);
  for (std::size_t i = 0; i < v.size(); ++i) {
    const float f = static_cast<float>(v[i]);
    std::memcpy(bytes.data() + 8 + 4 * i, &f, 4);
  }
  write_bytes(path, bytes);
}

std::vector<double> read_vector_file(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  if (bytes.size() < 8) throw FormatError(FormatErrorKind::kMalformed, "vector file is truncated");
  std::uint64_t n = 0;
  std::memcpy(&n, bytes.data(), 8);
  if (n > (bytes.size() - 8) / 4 || bytes.size() != 8 + 4 * n) {
    throw FormatError(FormatErrorKind::kMalformed, "vector file length prefix does not match its size");
  }
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + 8 + 4 * i, 4);
    v[i] = f;
  }
  return v;
}

}  // namespace quicfl
