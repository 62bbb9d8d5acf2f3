#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "quicfl/bitpack.hpp"
#include "quicfl/error.hpp"
#include "quicfl/prf.hpp"

using namespace quicfl;

TEST(Bitpack, HandEvaluatedLayout) {
  // 7 = 111, 0 = 000, 5 = 101 least significant bit first: 1110 0010 1 -> 0x47 0x01
  std::vector<std::uint32_t> msgs = {7, 0, 5};
  auto bytes = bitpack(msgs, 3);
  ASSERT_EQ(bytes.size(), 2u);
  EXPECT_EQ(bytes[0], 0x47);
  EXPECT_EQ(bytes[1], 0x01);
}

TEST(Bitpack, RoundTripEveryWidth) {
  for (int b = 1; b <= 8; ++b) {
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 1000u, 1023u}) {
      std::vector<std::uint32_t> msgs(n);
      for (std::size_t i = 0; i < n; ++i) msgs[i] = static_cast<std::uint32_t>(prf(b, i) % (1u << b));
      auto bytes = bitpack(msgs, b);
      EXPECT_EQ(bytes.size(), (n * b + 7) / 8);
      EXPECT_EQ(bitunpack(bytes, n, b), msgs) << b << " " << n;
    }
  }
}

TEST(Bitpack, Errors) {
  std::vector<std::uint32_t> msgs = {4};
  EXPECT_THROW(bitpack(msgs, 2), RangeError);
  EXPECT_THROW(bitpack(msgs, 0), DomainError);
  EXPECT_THROW(bitpack(msgs, 9), DomainError);
  std::vector<std::uint8_t> bytes(3);
  EXPECT_THROW(bitunpack(bytes, 8, 2), FormatError);
}

TEST(Prf, DeterministicAndDomainSeparated) {
  EXPECT_EQ(prf(1, 2), prf(1, 2));
  EXPECT_NE(prf(1, 2, PrfDomain::kSigns), prf(1, 2, PrfDomain::kShared));
  EXPECT_NE(derive_seed(5, 1, 2), derive_seed(5, 2, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(prf(7, i));
  EXPECT_EQ(seen.size(), 10000u);
}

TEST(Prf, UniformAndSharedMoments) {
  const int n = 200000;
  double mean = 0, var = 0;
  std::vector<int> hist(8, 0);
  for (int i = 0; i < n; ++i) {
    const double u = prf_uniform(3, i);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    mean += u / n;
    var += (u - 0.5) * (u - 0.5) / n;
    ++hist[prf_shared(3, i, 3)];
  }
  EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(var, 1.0 / 12, 1e-3);
  // Chi-square with 7 degrees of freedom, far tail cutoff.
  double chi2 = 0;
  for (int c : hist) chi2 += (c - n / 8.0) * (c - n / 8.0) / (n / 8.0);
  EXPECT_LT(chi2, 30.0);
  EXPECT_EQ(prf_shared(3, 0, 0), 0u);
}
