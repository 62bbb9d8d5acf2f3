#include "quicfl/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "quicfl/bitpack.hpp"
#include "quicfl/error.hpp"
#include "quicfl/normal.hpp"
#include "quicfl/prf.hpp"
#include "quicfl/transform.hpp"

namespace quicfl {

namespace {

double norm_of(std::span<const double> x) {
  double sq = 0;
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("input contains a non-finite value");
    sq += v * v;
  }
  return std::sqrt(sq);
}

void check_bits(int b) {
  if (b < 1 || b > 8) throw DomainError("b must lie in 1..8");
}

// Stochastic rounding of v in [lo, hi] onto levels lo + k*step.
std::uint32_t round_level(double v, double lo, double step, int levels, double u) {
  double pos = (v - lo) / step;
  pos = std::clamp(pos, 0.0, static_cast<double>(levels - 1));
  // Values that sit on a level up to rounding are reproduced exactly.
  if (std::abs(pos - std::round(pos)) < 1e-9) pos = std::round(pos);
  double fl = std::floor(pos);
  std::uint32_t k = static_cast<std::uint32_t>(fl);
  if (k >= static_cast<std::uint32_t>(levels - 1)) return static_cast<std::uint32_t>(levels - 1);
  return u < pos - fl ? k + 1 : k;
}

}  // namespace

BsqMessage bsq_encode(std::span<const double> x, double p, int b, std::uint64_t private_seed) {
  if (!(p > 0 && p < 1)) throw DomainError("p must lie in (0, 1)");
  check_bits(b);
  const double norm = norm_of(x);
  if (norm == 0) throw DomainError("bsq needs a nonzero vector");
  BsqMessage msg;
  msg.d = x.size();
  msg.b = b;
  msg.threshold = norm / std::sqrt(static_cast<double>(x.size()) * p);
  msg.payload.assign(packed_size(x.size(), b), 0);
  const int levels = 1 << b;
  const double lo = -msg.threshold, step = 2 * msg.threshold / (levels - 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > msg.threshold) {
      msg.outliers.push_back({static_cast<std::uint32_t>(i), static_cast<float>(x[i])});
      continue;
    }
    pack_one(msg.payload.data(), i, round_level(x[i], lo, step, levels, prf_uniform(private_seed, i)), b);
  }
  return msg;
}

std::vector<double> bsq_decode(const BsqMessage& msg) {
  check_bits(msg.b);
  if (msg.payload.size() != packed_size(msg.d, msg.b)) {
    throw FormatError(FormatErrorKind::kMalformed, "bsq payload length mismatch");
  }
  const int levels = 1 << msg.b;
  const double lo = -msg.threshold, step = 2 * msg.threshold / (levels - 1);
  std::vector<double> out(msg.d);
  for (std::size_t i = 0; i < msg.d; ++i) out[i] = lo + step * unpack_one(msg.payload.data(), i, msg.b);
  for (const auto& o : msg.outliers) {
    if (o.index >= msg.d) throw FormatError(FormatErrorKind::kMalformed, "bsq outlier out of range");
    out[o.index] = o.value;
  }
  return out;
}

QsgdMessage qsgd_encode(std::span<const double> x, int b, std::uint64_t private_seed) {
  check_bits(b);
  const double norm = norm_of(x);
  if (norm == 0) throw DomainError("qsgd needs a nonzero vector");
  QsgdMessage msg;
  msg.d = x.size();
  msg.b = b;
  msg.norm = norm;
  msg.signs.assign(packed_size(x.size(), 1), 0);
  msg.levels.assign(packed_size(x.size(), b), 0);
  const int levels = 1 << b;
  const double step = 1.0 / (levels - 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < 0) pack_one(msg.signs.data(), i, 1, 1);
    const double a = std::abs(x[i]) / norm;
    pack_one(msg.levels.data(), i, round_level(a, 0.0, step, levels, prf_uniform(private_seed, i)), b);
  }
  return msg;
}

std::vector<double> qsgd_decode(const QsgdMessage& msg) {
  check_bits(msg.b);
  if (msg.signs.size() != packed_size(msg.d, 1) || msg.levels.size() != packed_size(msg.d, msg.b)) {
    throw FormatError(FormatErrorKind::kMalformed, "qsgd payload length mismatch");
  }
  const double step = 1.0 / ((1 << msg.b) - 1);
  std::vector<double> out(msg.d);
  for (std::size_t i = 0; i < msg.d; ++i) {
    double v = msg.norm * step * unpack_one(msg.levels.data(), i, msg.b);
    out[i] = unpack_one(msg.signs.data(), i, 1) ? -v : v;
  }
  return out;
}

MinMaxMessage minmax_hadamard_encode(std::span<const double> x, int b, std::uint64_t seed,
                                     std::uint64_t private_seed) {
  check_bits(b);
  if (norm_of(x) == 0) throw DomainError("minmax_hadamard needs a nonzero vector");
  const RotationSpec spec = RotationSpec::make(x.size(), seed);
  const auto y = rht_forward(x, spec);
  MinMaxMessage msg;
  msg.d = spec.d;
  msg.d_pad = spec.d_pad;
  msg.b = b;
  msg.seed = seed;
  auto [mn, mx] = std::minmax_element(y.begin(), y.end());
  msg.lo = *mn;
  msg.hi = *mx;
  msg.payload.assign(packed_size(y.size(), b), 0);
  if (msg.hi > msg.lo) {
    const int levels = 1 << b;
    const double step = (msg.hi - msg.lo) / (levels - 1);
    for (std::size_t i = 0; i < y.size(); ++i)
      pack_one(msg.payload.data(), i, round_level(y[i], msg.lo, step, levels, prf_uniform(private_seed, i)), b);
  }
  return msg;
}

std::vector<double> minmax_hadamard_decode(const MinMaxMessage& msg) {
  check_bits(msg.b);
  if (msg.payload.size() != packed_size(msg.d_pad, msg.b)) {
    throw FormatError(FormatErrorKind::kMalformed, "minmax payload length mismatch");
  }
  std::vector<double> y(msg.d_pad, msg.lo);
  if (msg.hi > msg.lo) {
    const double step = (msg.hi - msg.lo) / ((1 << msg.b) - 1);
    for (std::size_t i = 0; i < msg.d_pad; ++i) y[i] = msg.lo + step * unpack_one(msg.payload.data(), i, msg.b);
  }
  return rht_inverse(y, RotationSpec::make(msg.d, msg.seed));
}

OneBitOutput one_bit_reference(double z, int h_bit, double u) {
  static const double T = compute_threshold(Rational{1, 512});
  if (!(std::abs(z) <= T + 1e-9)) throw RangeError("z lies outside [-T, T] for p = 1/512");
  if (h_bit != 0 && h_bit != 1) throw DomainError("shared bit must be 0 or 1");
  constexpr double a = kOneBitAlpha, b = kOneBitBeta;
  int x;
  if (z >= 0) {
    x = h_bit == 0 ? 1 : (u < 2 * z / (a + b) ? 1 : 0);
  } else {
    x = h_bit == 1 ? 0 : (u < -2 * z / (a + b) ? 0 : 1);
  }
  double rec;
  if (h_bit == 0) rec = x == 0 ? -b : a;
  else rec = x == 0 ? -a : b;
  return {x, rec};
}

OneBitOutput one_bit_reference(double z, int h_bit, std::uint64_t private_seed, std::uint64_t counter) {
  return one_bit_reference(z, h_bit, prf_uniform(private_seed, counter));
}

namespace {

// Probability of each (H, X) outcome, summed against f(reconstruction).
template <class F>
double one_bit_expect(double z, F&& f) {
  constexpr double a = kOneBitAlpha, b = kOneBitBeta;
  if (z >= 0) {
    const double q = 2 * z / (a + b);
    return 0.5 * f(a) + 0.5 * (q * f(b) + (1 - q) * f(-a));
  }
  const double q = -2 * z / (a + b);
  return 0.5 * f(-a) + 0.5 * (q * f(-b) + (1 - q) * f(a));
}

}  // namespace

double one_bit_reference_mean(double z) {
  return one_bit_expect(z, [](double r) { return r; });
}

double one_bit_reference_mse(double z) {
  return one_bit_expect(z, [z](double r) { return (z - r) * (z - r); });
}

}  // namespace quicfl
