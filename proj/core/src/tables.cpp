#include "quicfl/tables.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "quicfl/error.hpp"
#include "quicfl/hash.hpp"
#include "quicfl/normal.hpp"
#include "quicfl/table_io.hpp"

namespace quicfl {

QuantConfig QuantConfig::make(int b, int ell, int m, Rational p) {
  return make_with_threshold(b, ell, m, p, compute_threshold(p));
}

QuantConfig QuantConfig::make_with_threshold(int b, int ell, int m, Rational p,
                                             double threshold) {
  if (b < 1 || b > 8) throw DomainError("b must lie in 1..8");
  if (ell < 0 || ell > 8) throw DomainError("ell must lie in 0..8");
  if (m < 2) throw DomainError("m must be at least 2");
  if (p.num <= 0 || p.den <= 0 || p.num > p.den) {
    throw DomainError("p=" + p.str() + " must lie in (0, 1]");
  }
  if (!(threshold > 0) || !std::isfinite(threshold)) {
    throw DomainError("threshold must be positive; p=1 leaves no range to quantize");
  }
  QuantConfig cfg;
  cfg.b = b;
  cfg.ell = ell;
  cfg.m = m;
  cfg.p = p;
  cfg.threshold = threshold;
  cfg.quantiles = compute_quantiles(m, threshold);
  return cfg;
}

void check_shapes(const QuantConfig& cfg, std::span<const double> r,
                  const std::vector<double>* s) {
  const std::size_t cells = static_cast<std::size_t>(cfg.rows()) * cfg.cols();
  if (r.size() != cells) {
    throw StructuralError("r has " + std::to_string(r.size()) + " entries, expected " +
                          std::to_string(cells));
  }
  if (s && s->size() != cells * cfg.m) {
    throw StructuralError("s has " + std::to_string(s->size()) + " entries, expected " +
                          std::to_string(cells * cfg.m));
  }
  if (cfg.quantiles.size() != static_cast<std::size_t>(cfg.m)) {
    throw StructuralError("quantile count does not match m");
  }
}

QuantTable::QuantTable(QuantConfig config, std::vector<double> r,
                       std::optional<std::vector<double>> s)
    : config_(std::move(config)), r_(std::move(r)), s_(std::move(s)) {
  check_shapes(config_, r_, s_ ? &*s_ : nullptr);
  for (double v : r_) {
    if (!std::isfinite(v)) throw DomainError("r contains a non-finite value");
  }
  const int H = rows(), X = cols();
  col_means_.assign(X, 0.0);
  for (int x = 0; x < X; ++x) {
    double sum = 0;
    for (int h = 0; h < H; ++h) sum += this->r(h, x);
    col_means_[x] = sum / H;
  }
  prefix_.assign(static_cast<std::size_t>(X - 1) * H, 0.0);
  for (int x = 0; x + 1 < X; ++x) {
    // P[x][h] = (sum_{h'<h} r[h'][x+1] + sum_{h'>=h} r[h'][x]) / H
    double upper = 0, lower = 0;
    for (int h = 0; h < H; ++h) lower += this->r(h, x);
    for (int h = 0; h < H; ++h) {
      prefix_[x * H + h] = (upper + lower) / H;
      upper += this->r(h, x + 1);
      lower -= this->r(h, x);
    }
  }
  hash_ = fnv1a64(canonical_head(config_, r_));
}

const std::vector<double>& QuantTable::s_values() const {
  if (!s_) throw DomainError("table carries no sender probabilities");
  return *s_;
}

QuantTable QuantTable::with_s(std::vector<double> s) const {
  return QuantTable(config_, r_, std::move(s));
}

QuantTable QuantTable::without_s() const { return QuantTable(config_, r_); }

bool TableDiagnostics::valid(const TableTolerances& tol) const noexcept {
  bool ok = symmetry <= tol.symmetry && monotone_x <= tol.monotone &&
            monotone_h <= tol.monotone && boundary <= tol.boundary &&
            col_means_strict && prefix_order <= tol.monotone;
  if (has_s) {
    ok = ok && simplex <= tol.simplex && negativity <= tol.negativity &&
         unbiasedness <= tol.unbiasedness;
  }
  return ok;
}

std::string TableDiagnostics::summary() const {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "symmetry=%.3g monotone_x=%.3g monotone_h=%.3g boundary=%.3g "
                "col_mean_order=%.3g strict=%d prefix_order=%.3g",
                symmetry, monotone_x, monotone_h, boundary, col_mean_order,
                col_means_strict ? 1 : 0, prefix_order);
  std::string out = buf;
  if (has_s) {
    std::snprintf(buf, sizeof buf, " simplex=%.3g negativity=%.3g unbiasedness=%.3g",
                  simplex, negativity, unbiasedness);
    out += buf;
  }
  return out;
}

TableDiagnostics validate_table(const QuantTable& t) {
  const QuantConfig& cfg = t.config();
  check_shapes(cfg, t.r_values(), t.has_s() ? &t.s_values() : nullptr);
  const int H = t.rows(), X = t.cols();
  TableDiagnostics d;
  for (int h = 0; h < H; ++h) {
    for (int x = 0; x < X; ++x) {
      d.symmetry = std::max(d.symmetry, std::abs(t.r(h, x) + t.r(H - 1 - h, X - 1 - x)));
      if (x + 1 < X) d.monotone_x = std::max(d.monotone_x, t.r(h, x) - t.r(h, x + 1));
      if (h + 1 < H) d.monotone_h = std::max(d.monotone_h, t.r(h, x) - t.r(h + 1, x));
    }
  }
  const auto& M = t.col_means();
  d.boundary = std::max(std::abs(M[0] + cfg.threshold), std::abs(M[X - 1] - cfg.threshold));
  d.col_mean_order = X > 1 ? M[0] - M[1] : 0.0;
  for (int x = 0; x + 1 < X; ++x) {
    d.col_mean_order = std::max(d.col_mean_order, M[x] - M[x + 1]);
    if (!(M[x + 1] > M[x])) d.col_means_strict = false;
    for (int h = 0; h + 1 < H; ++h) {
      d.prefix_order = std::max(d.prefix_order, t.prefix(x, h) - t.prefix(x, h + 1));
    }
  }
  if (t.has_s()) {
    d.has_s = true;
    for (int q = 0; q < cfg.m; ++q) {
      double mean = 0;
      for (int h = 0; h < H; ++h) {
        double total = 0;
        for (int x = 0; x < X; ++x) {
          double v = t.s(h, q, x);
          d.negativity = std::max(d.negativity, -v);
          total += v;
          mean += v * t.r(h, x);
        }
        d.simplex = std::max(d.simplex, std::abs(total - 1.0));
      }
      d.unbiasedness = std::max(d.unbiasedness, std::abs(mean / H - cfg.quantiles[q]));
    }
  }
  return d;
}

}  // namespace quicfl
