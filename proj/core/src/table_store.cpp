#include "quicfl/table_store.hpp"

#include <cstdlib>

#include "quicfl/error.hpp"
#include "quicfl/solver.hpp"
#include "quicfl/table_io.hpp"

namespace quicfl {

int default_ell(int b) noexcept { return b == 1 ? 6 : b == 2 ? 5 : 4; }

std::vector<std::filesystem::path> table_search_path() {
  std::vector<std::filesystem::path> out;
  if (const char* env = std::getenv("QUICFL_TABLE_DIR"); env && *env) out.emplace_back(env);
#ifdef QUICFL_INSTALL_TABLE_DIR
  out.emplace_back(QUICFL_INSTALL_TABLE_DIR);
#endif
#ifdef QUICFL_SOURCE_TABLE_DIR
  out.emplace_back(QUICFL_SOURCE_TABLE_DIR);
#endif
  return out;
}

std::optional<std::filesystem::path> find_table(int b, int ell, int m, Rational p) {
  const std::string name = default_table_name(b, ell, m, p);
  for (const auto& dir : table_search_path()) {
    auto path = dir / name;
    std::error_code ec;
    if (std::filesystem::is_regular_file(path, ec)) return path;
  }
  return std::nullopt;
}

QuantTable load_default_table(int b, int ell, int m, Rational p, bool with_s) {
  auto path = find_table(b, ell, m, p);
  if (!path) {
    std::string dirs;
    for (const auto& d : table_search_path()) dirs += " " + d.string();
    throw Error("no table " + default_table_name(b, ell, m, p) + " in:" +
                (dirs.empty() ? std::string(" (empty search path)") : dirs) +
                "; set QUICFL_TABLE_DIR or run `quicfl solve`");
  }
  QuantTable t = load_table(*path);
  if (with_s && !t.has_s()) t = attach_sender(t);
  return t;
}

}  // namespace quicfl
