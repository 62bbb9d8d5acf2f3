#include "quicfl/table_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "quicfl/error.hpp"
#include "quicfl/hash.hpp"

namespace quicfl {

namespace {

constexpr std::string_view kMagicLine = "QUICFL-TABLE v1";

[[noreturn]] void malformed(const std::string& what) {
  throw FormatError(FormatErrorKind::kMalformed, "table file: " + what);
}

void append_row(std::string& out, const double* row, int n) {
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += format_real(row[i]);
  }
  out += '\n';
}

double parse_real(std::string_view tok) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    malformed("bad number '" + std::string(tok) + "'");
  }
  return v;
}

long long parse_int(std::string_view tok) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    malformed("bad integer '" + std::string(tok) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view expect_key(std::string_view tok, std::string_view key) {
  if (tok.substr(0, key.size()) != key) malformed("expected '" + std::string(key) + "'");
  return tok.substr(key.size());
}

// Line cursor that remembers where each line started, for the checksum.
struct Lines {
  std::string_view text;
  std::size_t pos = 0;

  bool done() const { return pos >= text.size(); }
  std::string_view next() {
    if (done()) malformed("unexpected end of file");
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    return line;
  }
};

void read_block(Lines& lines, int nrows, int ncols, std::vector<double>& out) {
  for (int i = 0; i < nrows; ++i) {
    auto toks = split(lines.next());
    if (static_cast<int>(toks.size()) != ncols) {
      malformed("row has " + std::to_string(toks.size()) + " values, expected " +
                std::to_string(ncols));
    }
    for (auto tok : toks) out.push_back(parse_real(tok));
  }
}

}  // namespace

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string canonical_head(const QuantConfig& cfg, std::span<const double> r) {
  std::string out;
  out += kMagicLine;
  out += '\n';
  out += "b=" + std::to_string(cfg.b) + " l=" + std::to_string(cfg.ell) +
         " m=" + std::to_string(cfg.m) + " p=" + cfg.p.str() + '\n';
  out += "T=" + format_real(cfg.threshold) + '\n';
  out += "r:\n";
  for (int h = 0; h < cfg.rows(); ++h) append_row(out, r.data() + h * cfg.cols(), cfg.cols());
  return out;
}

std::string write_table_text(const QuantTable& t) {
  const QuantConfig& cfg = t.config();
  std::string out = canonical_head(cfg, t.r_values());
  if (t.has_s()) {
    out += "s:\n";
    const auto& s = t.s_values();
    const std::size_t nrows = static_cast<std::size_t>(cfg.rows()) * cfg.m;
    for (std::size_t i = 0; i < nrows; ++i) append_row(out, s.data() + i * cfg.cols(), cfg.cols());
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "checksum=%016llx\n",
                static_cast<unsigned long long>(fnv1a64(out)));
  out += buf;
  return out;
}

QuantTable read_table_text(std::string_view text) {
  Lines lines{text};
  std::string_view magic = lines.next();
  if (magic.substr(0, 13) != "QUICFL-TABLE ") malformed("missing QUICFL-TABLE header");
  if (magic != kMagicLine) {
    throw FormatError(FormatErrorKind::kVersion,
                      "unsupported table version '" + std::string(magic.substr(13)) + "'");
  }
  auto head = split(lines.next());
  if (head.size() != 4) malformed("parameter line needs b, l, m and p");
  int b = static_cast<int>(parse_int(expect_key(head[0], "b=")));
  int ell = static_cast<int>(parse_int(expect_key(head[1], "l=")));
  int m = static_cast<int>(parse_int(expect_key(head[2], "m=")));
  Rational p;
  try {
    p = Rational::parse(expect_key(head[3], "p="));
  } catch (const DomainError& e) {
    malformed(e.what());
  }
  double threshold = parse_real(expect_key(lines.next(), "T="));
  QuantConfig cfg;
  try {
    cfg = QuantConfig::make_with_threshold(b, ell, m, p, threshold);
  } catch (const DomainError& e) {
    malformed(e.what());
  }
  if (lines.next() != "r:") malformed("expected 'r:'");
  std::vector<double> r;
  read_block(lines, cfg.rows(), cfg.cols(), r);

  std::optional<std::vector<double>> s;
  std::size_t body_end = lines.pos;
  std::string_view line = lines.next();
  if (line == "s:") {
    s.emplace();
    read_block(lines, cfg.rows() * cfg.m, cfg.cols(), *s);
    body_end = lines.pos;
    line = lines.next();
  }
  std::string_view digest = expect_key(line, "checksum=");
  if (digest.size() != 16) malformed("checksum must be 16 hex digits");
  std::uint64_t stored = 0;
  auto [ptr, ec] = std::from_chars(digest.data(), digest.data() + 16, stored, 16);
  if (ec != std::errc() || ptr != digest.data() + 16) malformed("bad checksum digits");
  if (!lines.done() && !split(text.substr(lines.pos)).empty()) {
    malformed("trailing content after checksum");
  }
  if (fnv1a64(text.substr(0, body_end)) != stored) {
    throw FormatError(FormatErrorKind::kChecksum, "table file checksum mismatch");
  }
  try {
    return QuantTable(std::move(cfg), std::move(r), std::move(s));
  } catch (const DomainError& e) {
    malformed(e.what());
  }
}

void save_table(const QuantTable& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << write_table_text(t);
  if (!out) throw Error("failed writing " + path.string());
}

QuantTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_table_text(buf.str());
}

std::string default_table_name(int b, int ell, int m, const Rational& p) {
  return "b" + std::to_string(b) + "_l" + std::to_string(ell) + "_m" + std::to_string(m) +
         "_p" + std::to_string(p.num) + "-" + std::to_string(p.den) + ".qfl";
}

}  // namespace quicfl
