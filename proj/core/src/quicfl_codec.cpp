#include "quicfl/quicfl_codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "quicfl/bitpack.hpp"
#include "quicfl/error.hpp"
#include "quicfl/prf.hpp"
#include "quicfl/transform.hpp"

namespace quicfl {

namespace {

constexpr double kRangeSlack = 1e-9;
constexpr double kProbSlack = 1e-9;

struct Rotated {
  RotationSpec spec;
  double norm = 0;
  std::vector<double> z;  // sqrt(d_pad)/norm * RHT(x)
};

Rotated rotate(std::span<const double> x, std::uint64_t global_seed) {
  if (x.empty()) throw DomainError("cannot encode an empty vector");
  Rotated out;
  out.spec = RotationSpec::make(x.size(), global_seed);
  double sq = 0;
  for (double v : x) {
    if (!std::isfinite(v)) throw DomainError("input contains a non-finite value");
    sq += v * v;
  }
  out.norm = std::sqrt(sq);
  if (out.norm == 0) return out;
  out.z = rht_forward(x, out.spec);
  const double scale = std::sqrt(static_cast<double>(out.spec.d_pad)) / out.norm;
  for (double& v : out.z) v *= scale;
  return out;
}

EncodedVector header(const Rotated& rot, const QuantTable& t, std::uint64_t global_seed,
                     std::uint64_t client_seed) {
  EncodedVector msg;
  msg.d = rot.spec.d;
  msg.d_pad = rot.spec.d_pad;
  msg.b = static_cast<std::uint8_t>(t.config().b);
  msg.ell = static_cast<std::uint8_t>(t.config().ell);
  msg.prf_version = kPrfVersion;
  msg.table_hash = t.hash();
  msg.global_seed = global_seed;
  msg.client_seed = client_seed;
  msg.norm = rot.norm;
  msg.payload.assign(packed_size(msg.d_pad, t.config().b), 0);
  return msg;
}

template <class Choose>
EncodedVector encode_with(std::span<const double> x, const QuantTable& t, std::uint64_t global_seed,
                          std::uint64_t client_seed, Choose&& choose) {
  Rotated rot = rotate(x, global_seed);
  EncodedVector msg = header(rot, t, global_seed, client_seed);
  if (rot.norm == 0) return msg;
  const double T = t.config().threshold;
  const int b = t.config().b, ell = t.config().ell;
  for (std::size_t i = 0; i < rot.z.size(); ++i) {
    const double z = rot.z[i];
    if (std::abs(z) > T) {
      msg.outliers.push_back({static_cast<std::uint32_t>(i), static_cast<float>(z)});
      continue;
    }
    const int h = static_cast<int>(prf_shared(client_seed, i, ell));
    pack_one(msg.payload.data(), i, choose(i, z, h), b);
  }
  return msg;
}

}  // namespace

SenderDecision sender_distribution(double z, const QuantTable& t) {
  const double T = t.config().threshold;
  if (!(std::abs(z) <= T + kRangeSlack)) {
    throw RangeError("z=" + std::to_string(z) + " lies outside [-T, T]; send it as an outlier");
  }
  const auto& M = t.col_means();
  const int H = t.rows(), X = t.cols();
  z = std::clamp(z, M.front(), M.back());
  SenderDecision s;
  s.x_lower = static_cast<int>(std::upper_bound(M.begin(), M.end(), z) - M.begin()) - 1;
  s.x_lower = std::clamp(s.x_lower, 0, X - 1);
  const int xl = s.x_lower;
  if (xl == X - 1) {
    // Top edge: the next column is treated as +infinity, so every row sends X-1.
    s.h_lower = 0;
    s.mu = H * z;
    for (int h = 1; h < H; ++h) s.mu -= t.r(h, xl);
    s.p_up = 0;
    return s;
  }
  int lo = 0, hi = H - 1;  // largest h with P[xl][h] <= z; P[xl][0] = M[xl] <= z
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (t.prefix(xl, mid) <= z) lo = mid; else hi = mid - 1;
  }
  const int hl = lo;
  s.h_lower = hl;
  double mu = H * z;
  for (int h = 0; h < hl; ++h) mu -= t.r(h, xl + 1);
  for (int h = hl + 1; h < H; ++h) mu -= t.r(h, xl);
  s.mu = mu;
  const double a = t.r(hl, xl), b = t.r(hl, xl + 1);
  double p = b > a ? (mu - a) / (b - a) : 0.0;
  if (p < -kProbSlack || p > 1 + kProbSlack) {
    throw ConsistencyError("p_up=" + std::to_string(p) + " outside [0, 1] at z=" + std::to_string(z));
  }
  s.p_up = std::clamp(p, 0.0, 1.0);
  return s;
}

double expected_reconstruction(const SenderDecision& s, const QuantTable& t) {
  const int H = t.rows(), X = t.cols(), xl = s.x_lower, hl = s.h_lower;
  if (xl == X - 1) return t.col_means()[X - 1];
  double sum = 0;
  for (int h = 0; h < hl; ++h) sum += t.r(h, xl + 1);
  for (int h = hl + 1; h < H; ++h) sum += t.r(h, xl);
  sum += s.p_up * t.r(hl, xl + 1) + (1 - s.p_up) * t.r(hl, xl);
  return sum / H;
}

double quantizer_mse_at(double z, const QuantTable& t) {
  const SenderDecision s = sender_distribution(z, t);
  const int H = t.rows(), X = t.cols(), xl = s.x_lower, hl = s.h_lower;
  auto sq = [z](double v) { return (z - v) * (z - v); };
  double sum = 0;
  if (xl == X - 1) {
    for (int h = 0; h < H; ++h) sum += sq(t.r(h, xl));
    return sum / H;
  }
  for (int h = 0; h < hl; ++h) sum += sq(t.r(h, xl + 1));
  for (int h = hl + 1; h < H; ++h) sum += sq(t.r(h, xl));
  sum += s.p_up * sq(t.r(hl, xl + 1)) + (1 - s.p_up) * sq(t.r(hl, xl));
  return sum / H;
}

QuantileRounding round_to_quantiles(double z, std::span<const double> q) {
  const int m = static_cast<int>(q.size());
  if (m < 2) throw DomainError("need at least 2 quantiles");
  if (!(z >= q.front() - kRangeSlack && z <= q.back() + kRangeSlack)) {
    throw RangeError("z lies outside the quantile range");
  }
  z = std::clamp(z, q.front(), q.back());
  int lo = static_cast<int>(std::upper_bound(q.begin(), q.end(), z) - q.begin()) - 1;
  lo = std::clamp(lo, 0, m - 2);
  return {lo, (z - q[lo]) / (q[lo + 1] - q[lo])};
}

EncodedVector encode_quicfl(std::span<const double> x, const QuantTable& t,
                            std::uint64_t global_seed, std::uint64_t client_seed,
                            std::uint64_t private_seed) {
  return encode_with(x, t, global_seed, client_seed, [&](std::size_t i, double z, int h) {
    const SenderDecision s = sender_distribution(z, t);
    return sample_message(s, h, prf_uniform(private_seed, i));
  });
}

EncodedVector encode_alg1(std::span<const double> x, const QuantTable& t,
                          std::uint64_t global_seed, std::uint64_t client_seed,
                          std::uint64_t private_seed) {
  if (!t.has_s()) throw DomainError("the quantile encoder needs a table with sender probabilities");
  const auto& qs = t.config().quantiles;
  const int X = t.cols();
  EncodedVector msg = encode_with(x, t, global_seed, client_seed, [&](std::size_t i, double z, int h) {
    const QuantileRounding qr = round_to_quantiles(z, qs);
    const double u1 = prf_uniform(private_seed, 2 * i);
    const int q = u1 < qr.p_up ? qr.lower + 1 : qr.lower;
    const double u2 = prf_uniform(private_seed, 2 * i + 1);
    double acc = 0;
    int last = 0;
    for (int x = 0; x < X; ++x) {
      const double p = t.s(h, q, x);
      if (p <= 0) continue;
      last = x;
      acc += p;
      if (u2 < acc) return static_cast<std::uint32_t>(x);
    }
    return static_cast<std::uint32_t>(last);
  });
  msg.flags = kFlagAlg1;
  return msg;
}

std::vector<double> decode_aggregate(std::span<const EncodedVector> msgs, const QuantTable& t,
                                     std::uint64_t global_seed, DecodeStats* stats) {
  if (msgs.empty()) throw DomainError("nothing to aggregate");
  const auto& first = msgs.front();
  auto mismatch = [](const std::string& what) {
    throw FormatError(FormatErrorKind::kMismatch, what);
  };
  for (const auto& m : msgs) {
    check_message(m);
    if (m.d != first.d || m.d_pad != first.d_pad) mismatch("clients disagree on dimension");
    if (m.b != t.config().b || m.ell != t.config().ell) mismatch("message b/ell differ from the table");
    if (m.table_hash != t.hash()) mismatch("message table hash differs from the table");
    if (m.global_seed != global_seed) mismatch("message global seed differs from the decoder's");
  }
  const std::size_t d_pad = first.d_pad;
  const int b = t.config().b, ell = t.config().ell, X = t.cols();
  const double root = std::sqrt(static_cast<double>(d_pad));
  DecodeStats st;
  std::vector<double> acc(d_pad, 0.0);
  for (const auto& m : msgs) {
    ++st.clients;
    if (m.norm == 0) continue;
    const double scale = m.norm / root;
    std::size_t next = 0;
    for (std::size_t i = 0; i < d_pad; ++i) {
      if (next < m.outliers.size() && m.outliers[next].index == i) {
        acc[i] += scale * static_cast<double>(m.outliers[next].value);
        ++next;
        ++st.outliers;
        continue;
      }
      const int h = static_cast<int>(prf_shared(m.client_seed, i, ell));
      const auto x = unpack_one(m.payload.data(), i, b);
      acc[i] += scale * t.r_values()[static_cast<std::size_t>(h) * X + x];
      ++st.lookups;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(msgs.size());
  for (double& v : acc) v *= inv_n;
  auto out = rht_inverse(acc, RotationSpec::make(first.d, global_seed));
  ++st.inverse_transforms;
  if (stats) *stats = st;
  return out;
}

}  // namespace quicfl
