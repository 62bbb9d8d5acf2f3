#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quicfl/wire.hpp"

namespace quicfl {

/// Bounded-support quantization without rotation: coordinates above
/// T = ||x|| / sqrt(d p) are sent exactly, the rest are rounded
/// stochastically onto 2^b evenly spaced levels spanning [-T, T].
struct BsqMessage {
  std::uint64_t d = 0;
  int b = 1;
  double threshold = 0;
  std::vector<Outlier> outliers;
  std::vector<std::uint8_t> payload;

  std::size_t bits() const noexcept { return 64 + 64 * outliers.size() + 8 * payload.size(); }
};
BsqMessage bsq_encode(std::span<const double> x, double p, int b, std::uint64_t private_seed);
std::vector<double> bsq_decode(const BsqMessage& msg);

/// Basic QSGD: norm, sign bits and stochastic rounding of |x_i|/||x|| onto
/// {0, 1/(2^b-1), ..., 1}.
struct QsgdMessage {
  std::uint64_t d = 0;
  int b = 1;
  double norm = 0;
  std::vector<std::uint8_t> signs;
  std::vector<std::uint8_t> levels;

  std::size_t bits() const noexcept { return 64 + 8 * (signs.size() + levels.size()); }
};
QsgdMessage qsgd_encode(std::span<const double> x, int b, std::uint64_t private_seed);
std::vector<double> qsgd_decode(const QsgdMessage& msg);

/// Per-client RHT, then stochastic rounding onto 2^b levels between the
/// rotated minimum and maximum.
struct MinMaxMessage {
  std::uint64_t d = 0;
  std::uint64_t d_pad = 0;
  int b = 1;
  std::uint64_t seed = 0;
  double lo = 0;
  double hi = 0;
  std::vector<std::uint8_t> payload;

  std::size_t bits() const noexcept { return 128 + 8 * payload.size(); }
};
MinMaxMessage minmax_hadamard_encode(std::span<const double> x, int b, std::uint64_t seed,
                                     std::uint64_t private_seed);
std::vector<double> minmax_hadamard_decode(const MinMaxMessage& msg);

/// The one-shared-bit scheme with alpha = 0.8 and beta = 5.4.
inline constexpr double kOneBitAlpha = 0.8;
inline constexpr double kOneBitBeta = 5.4;

struct OneBitOutput {
  int message = 0;
  double reconstruction = 0;
};

/// u is the private uniform in [0, 1). Throws RangeError for |z| > T(1/512).
OneBitOutput one_bit_reference(double z, int h_bit, double u);
OneBitOutput one_bit_reference(double z, int h_bit, std::uint64_t private_seed,
                               std::uint64_t counter = 0);

/// E[Zhat | Z = z] and E[(z - Zhat)^2] over H and the private coin.
double one_bit_reference_mean(double z);
double one_bit_reference_mse(double z);

}  // namespace quicfl
