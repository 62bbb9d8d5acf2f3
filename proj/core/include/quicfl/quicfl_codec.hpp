#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "quicfl/tables.hpp"
#include "quicfl/wire.hpp"

namespace quicfl {

/// Interpolated sender for one coordinate: rows h < h_lower send
/// x_lower + 1, rows h > h_lower send x_lower, and row h_lower sends
/// x_lower + 1 with probability p_up.
struct SenderDecision {
  int x_lower = 0;
  int h_lower = 0;
  double mu = 0;
  double p_up = 0;
};

/// Sender distribution for z with |z| <= T (+1e-9). z is first clamped into
/// [M[0], M[2^b-1]], which only matters for tables whose boundary means are
/// not exactly +-T. Throws RangeError outside the range and ConsistencyError
/// when p_up leaves [0, 1] by more than 1e-9.
SenderDecision sender_distribution(double z, const QuantTable& t);

/// Message for shared index h given private uniform u in [0, 1).
inline std::uint32_t sample_message(const SenderDecision& s, int h, double u) noexcept {
  if (h < s.h_lower) return static_cast<std::uint32_t>(s.x_lower + 1);
  if (h > s.h_lower) return static_cast<std::uint32_t>(s.x_lower);
  return static_cast<std::uint32_t>(u < s.p_up ? s.x_lower + 1 : s.x_lower);
}

/// E[Zhat] over H and the private coin, computed exactly.
double expected_reconstruction(const SenderDecision& s, const QuantTable& t);

/// E[(z - Zhat)^2] over H and the private coin.
double quantizer_mse_at(double z, const QuantTable& t);

/// Stochastic rounding of z onto the quantile grid: returns the lower index
/// and the probability of rounding up.
struct QuantileRounding {
  int lower = 0;
  double p_up = 0;
};
QuantileRounding round_to_quantiles(double z, std::span<const double> quantiles);

/// Interpolated encoder (default).
EncodedVector encode_quicfl(std::span<const double> x, const QuantTable& t,
                            std::uint64_t global_seed, std::uint64_t client_seed,
                            std::uint64_t private_seed);

/// Quantile encoder: rounds onto Q_m, then samples from s[h][q][.].
/// Requires a table with s.
EncodedVector encode_alg1(std::span<const double> x, const QuantTable& t,
                          std::uint64_t global_seed, std::uint64_t client_seed,
                          std::uint64_t private_seed);

/// Operation counts from one decode_aggregate call.
struct DecodeStats {
  std::size_t clients = 0;
  std::size_t lookups = 0;
  std::size_t outliers = 0;
  std::size_t inverse_transforms = 0;
};

/// Averages the clients' estimates in the rotated domain and applies one
/// inverse RHT. Throws FormatError(kMismatch) when headers disagree with
/// each other, the table or global_seed.
std::vector<double> decode_aggregate(std::span<const EncodedVector> msgs, const QuantTable& t,
                                     std::uint64_t global_seed, DecodeStats* stats = nullptr);

}  // namespace quicfl
