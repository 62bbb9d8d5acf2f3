#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "quicfl/tables.hpp"

namespace quicfl {

/// ell used by default for each b: 6 for b=1, 5 for b=2 and 4 above.
int default_ell(int b) noexcept;

/// Directories searched for tables, in order: $QUICFL_TABLE_DIR, the
/// install location, then data/tables of the source tree this library was
/// built from.
std::vector<std::filesystem::path> table_search_path();

/// Path of the table file for (b, ell, m, p), if one exists on the search path.
std::optional<std::filesystem::path> find_table(int b, int ell, int m = 512, Rational p = {1, 512});

/// Loads the table, attaching s when it is missing and `with_s` is set.
/// Throws Error naming the searched directories when none is found.
QuantTable load_default_table(int b, int ell, int m = 512, Rational p = {1, 512},
                              bool with_s = false);

}  // namespace quicfl
