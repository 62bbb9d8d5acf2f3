#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "quicfl/tables.hpp"

namespace quicfl {

/// Shortest decimal that reads back to the same double ("%.17g").
std::string format_real(double v);

/// Canonical text of the header lines and the r block. Both the file
/// checksum and QuantTable::hash are computed over text produced here.
std::string canonical_head(const QuantConfig& cfg, std::span<const double> r);

/// Full file text including the optional s block and the checksum line.
std::string write_table_text(const QuantTable& t);

/// Parses file text. Raises FormatError with kind kVersion for an unknown
/// version line, kChecksum for a digest mismatch and kMalformed otherwise.
QuantTable read_table_text(std::string_view text);

void save_table(const QuantTable& t, const std::filesystem::path& path);
QuantTable load_table(const std::filesystem::path& path);

/// "b1_l6_m512_p1-512.qfl"
std::string default_table_name(int b, int ell, int m, const Rational& p);

}  // namespace quicfl
