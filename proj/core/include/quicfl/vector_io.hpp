#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace quicfl {

/// Vector files: u64 little-endian length followed by that many f32 values.
void write_vector_file(const std::filesystem::path& path, std::span<const double> v);
std::vector<double> read_vector_file(const std::filesystem::path& path);

/// Raw byte files for serialized messages.
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);

}  // namespace quicfl
