#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "quicfl/rational.hpp"

namespace quicfl {

/// Scheme parameters plus the derived threshold and quantile set.
struct QuantConfig {
  int b = 1;
  int ell = 0;
  int m = 512;
  Rational p{1, 512};
  double threshold = 0.0;
  std::vector<double> quantiles;

  /// Validates ranges and derives threshold and quantiles.
  static QuantConfig make(int b, int ell, int m, Rational p = {1, 512});
  /// Same, but with a threshold given explicitly (used when reading files so
  /// the stored value is reproduced bit for bit).
  static QuantConfig make_with_threshold(int b, int ell, int m, Rational p,
                                         double threshold);

  int rows() const noexcept { return 1 << ell; }
  int cols() const noexcept { return 1 << b; }
};

/// Receiver table r[h][x] (row-major, h outer), optional sender
/// probabilities s[h][q][x] and the lookup structures used by the
/// interpolated encoder. Immutable once built.
class QuantTable {
 public:
  QuantTable(QuantConfig config, std::vector<double> r,
             std::optional<std::vector<double>> s = std::nullopt);

  const QuantConfig& config() const noexcept { return config_; }
  int rows() const noexcept { return config_.rows(); }
  int cols() const noexcept { return config_.cols(); }

  double r(int h, int x) const noexcept { return r_[h * cols() + x]; }
  const std::vector<double>& r_values() const noexcept { return r_; }

  bool has_s() const noexcept { return s_.has_value(); }
  double s(int h, int q, int x) const noexcept {
    return (*s_)[(static_cast<std::size_t>(h) * config_.m + q) * cols() + x];
  }
  const std::vector<double>& s_values() const;

  /// M[x], the mean of column x over h.
  const std::vector<double>& col_means() const noexcept { return col_means_; }
  /// P[x][h] for x < 2^b - 1, stored flat with stride 2^ell.
  double prefix(int x, int h) const noexcept { return prefix_[x * rows() + h]; }

  /// FNV-1a-64 of the canonical header and r block. s does not enter, so
  /// attaching sender probabilities keeps the wire identity.
  std::uint64_t hash() const noexcept { return hash_; }

  QuantTable with_s(std::vector<double> s) const;
  QuantTable without_s() const;

 private:
  QuantConfig config_;
  std::vector<double> r_;
  std::optional<std::vector<double>> s_;
  std::vector<double> col_means_;
  std::vector<double> prefix_;
  std::uint64_t hash_ = 0;
};

/// Acceptance thresholds for validate_table.
struct TableTolerances {
  double symmetry = 1e-9;
  double monotone = 1e-9;
  double boundary = 1e-8;
  double simplex = 1e-8;
  double negativity = 1e-12;
  double unbiasedness = 1e-6;
};

/// Max absolute violation per invariant class. Zero means satisfied exactly.
struct TableDiagnostics {
  double symmetry = 0;
  double monotone_x = 0;
  double monotone_h = 0;
  double boundary = 0;
  /// Largest M[x] - M[x+1]; the column means must rise strictly, so any
  /// value >= 0 here with cols > 1 is a failure when col_means_strict is false.
  double col_mean_order = 0;
  bool col_means_strict = true;
  double prefix_order = 0;
  double simplex = 0;
  double negativity = 0;
  double unbiasedness = 0;
  bool has_s = false;

  bool valid(const TableTolerances& tol = {}) const noexcept;
  std::string summary() const;
};

/// Checks every table invariant. Dimension problems raise StructuralError
/// when building a QuantTable, so this only ever reports numeric violations.
TableDiagnostics validate_table(const QuantTable& t);

/// Throws StructuralError if r/s sizes disagree with cfg.
void check_shapes(const QuantConfig& cfg, std::span<const double> r,
                  const std::vector<double>* s);

}  // namespace quicfl
