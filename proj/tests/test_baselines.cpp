#include <gtest/gtest.h>

#include <cmath>

#include "quicfl/baselines.hpp"
#include "quicfl/error.hpp"
#include "quicfl/prf.hpp"

using namespace quicfl;

namespace {

std::vector<double> gaussian(std::size_t d, std::uint64_t seed) {
  std::vector<double> v(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double u1 = 1 - prf_uniform(seed, 2 * i), u2 = prf_uniform(seed, 2 * i + 1);
    v[i] = std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
  }
  return v;
}

// Mean of k independent decodes and the average single-decode vNMSE.
template <class Round>
std::pair<double, double> bias_probe(const std::vector<double>& x, int k, Round&& round) {
  std::vector<double> mean(x.size(), 0.0);
  double single = 0, energy = 0;
  for (double v : x) energy += v * v;
  for (int c = 0; c < k; ++c) {
    auto y = round(static_cast<std::uint64_t>(c));
    double e = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      mean[i] += y[i] / k;
      e += (y[i] - x[i]) * (y[i] - x[i]);
    }
    single += e / energy / k;
  }
  double e = 0;
  for (std::size_t i = 0; i < x.size(); ++i) e += (mean[i] - x[i]) * (mean[i] - x[i]);
  return {e / energy, single};
}

}  // namespace

TEST(Bsq, UnbiasedAndWithinBound) {
  auto x = gaussian(4096, 1);
  auto [mean_err, single] = bias_probe(x, 200, [&](std::uint64_t s) {
    return bsq_decode(bsq_encode(x, 1.0 / 32, 1, s));
  });
  EXPECT_LE(single, 32.0);
  EXPECT_NEAR(mean_err * 200 / single, 1.0, 0.25);
}

TEST(Bsq, OutliersExactAndLevels) {
  std::vector<double> x(64, 0.1);
  x[7] = 50;
  auto msg = bsq_encode(x, 1.0 / 32, 2, 3);
  ASSERT_EQ(msg.outliers.size(), 1u);
  EXPECT_EQ(msg.outliers[0].index, 7u);
  EXPECT_EQ(msg.outliers[0].value, 50.0f);
  auto y = bsq_decode(msg);
  EXPECT_EQ(y[7], 50.0);
  // Other coordinates land on one of the 4 levels spanning [-T, T].
  const double T = msg.threshold, step = 2 * T / 3;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (i == 7) continue;
    const double k = (y[i] + T) / step;
    EXPECT_NEAR(k, std::round(k), 1e-9);
  }
}

TEST(Qsgd, Unbiased) {
  auto x = gaussian(2048, 2);
  for (int b : {1, 4}) {
    auto [mean_err, single] = bias_probe(x, 200, [&](std::uint64_t s) {
      return qsgd_decode(qsgd_encode(x, b, s));
    });
    EXPECT_NEAR(mean_err * 200 / single, 1.0, 0.25) << b;
  }
}

TEST(MinMaxHadamard, UnbiasedAndExactOnConstants) {
  auto x = gaussian(1000, 3);
  auto [mean_err, single] = bias_probe(x, 200, [&](std::uint64_t s) {
    return minmax_hadamard_decode(minmax_hadamard_encode(x, 2, 77, s));
  });
  EXPECT_NEAR(mean_err * 200 / single, 1.0, 0.25);
  // 1-bit rounding of a vector whose rotation has two values only is exact.
  std::vector<double> e(8, 0.0);
  e[0] = 1;
  auto y = minmax_hadamard_decode(minmax_hadamard_encode(e, 1, 5, 6));
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(y[i], e[i], 1e-12);
}

TEST(Baselines, Domain) {
  std::vector<double> x(16, 1.0);
  EXPECT_THROW(bsq_encode(x, 0.0, 1, 1), DomainError);
  EXPECT_THROW(bsq_encode(x, 1.0 / 32, 0, 1), DomainError);
  EXPECT_THROW(qsgd_encode(x, 9, 1), DomainError);
  EXPECT_THROW(minmax_hadamard_encode({}, 2, 1, 1), DomainError);
}
