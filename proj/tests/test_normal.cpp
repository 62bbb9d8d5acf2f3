#include <gtest/gtest.h>

#include <cmath>

#include "quicfl/error.hpp"
#include "quicfl/normal.hpp"
#include "quicfl/rational.hpp"

using namespace quicfl;

namespace {

// Independent oracle: plain bisection on erfc, in the tail nearer to prob so
// the target mass is represented exactly.
double ref_quantile(double prob) {
  if (prob > 0.5) return -ref_quantile(1 - prob);
  double lo = -40, hi = 0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < prob ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Rational, ParsesFractionsAndIntegers) {
  EXPECT_EQ(Rational::parse("1/512"), (Rational{1, 512}));
  EXPECT_EQ(Rational::parse("1"), (Rational{1, 1}));
  EXPECT_EQ(Rational::parse("3/7").str(), "3/7");
  EXPECT_DOUBLE_EQ(Rational::parse("1/32").value(), 1.0 / 32);
}

TEST(Rational, RejectsMalformed) {
  for (const char* s : {"", "/", "1/", "/2", "a/b", "1/0", "0/5", "-1/4", "1/2/3", "1.5"}) {
    EXPECT_THROW(Rational::parse(s), DomainError) << s;
  }
}

TEST(Normal, QuantileMatchesBisection) {
  for (double prob : {1e-12, 1e-6, 1.0 / 1024, 0.01, 0.3, 0.5, 0.77, 0.999, 1 - 1e-9}) {
    EXPECT_NEAR(normal_quantile(prob), ref_quantile(prob), 1e-9 * (1 + std::abs(ref_quantile(prob))))
        << prob;
  }
}

TEST(Normal, CdfPdfBasics) {
  EXPECT_DOUBLE_EQ(normal_cdf(0), 0.5);
  EXPECT_NEAR(normal_pdf(0), 1 / std::sqrt(2 * M_PI), 1e-15);
  EXPECT_NEAR(normal_cdf(1.0) + normal_cdf(-1.0), 1.0, 1e-15);
}

TEST(Threshold, TwoSidedTailMassIsP) {
  for (Rational p : {Rational{1, 512}, Rational{1, 32}, Rational{1, 2}, Rational{3, 1000}}) {
    const double T = compute_threshold(p);
    EXPECT_NEAR(std::erfc(T / std::sqrt(2.0)), p.value(), 1e-12 * p.value() + 1e-15) << p.str();
  }
}

TEST(Threshold, PublishedValue) { EXPECT_NEAR(compute_threshold(Rational{1, 512}), 3.097, 1e-3); }

TEST(Threshold, Domain) {
  EXPECT_EQ(compute_threshold(Rational{1, 1}), 0.0);
  EXPECT_THROW(compute_threshold(Rational{3, 2}), DomainError);
  EXPECT_THROW(compute_threshold(0.0), DomainError);
  EXPECT_THROW(compute_threshold(-0.1), DomainError);
}

TEST(Quantiles, EqualMassOnTruncatedNormal) {
  const double T = compute_threshold(Rational{1, 512});
  const int m = 9;
  auto q = compute_quantiles(m, T);
  ASSERT_EQ(q.size(), static_cast<std::size_t>(m));
  EXPECT_DOUBLE_EQ(q.front(), -T);
  EXPECT_DOUBLE_EQ(q.back(), T);
  EXPECT_EQ(q[4], 0.0);
  const double lo = normal_cdf(-T), mass = normal_cdf(T) - lo;
  for (int i = 0; i < m; ++i) {
    EXPECT_NEAR((normal_cdf(q[i]) - lo) / mass, static_cast<double>(i) / (m - 1), 1e-11);
    EXPECT_DOUBLE_EQ(q[i], -q[m - 1 - i]);
  }
}

TEST(Quantiles, PublishedFourPointSet) {
  auto q = compute_quantiles(4, compute_threshold(Rational{1, 512}));
  const double want[] = {-3.097, -0.4298, 0.4298, 3.097};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(q[i], want[i], 5e-4);
}

TEST(Quantiles, Domain) {
  EXPECT_THROW(compute_quantiles(1, 3.0), DomainError);
  EXPECT_THROW(compute_quantiles(4, 0.0), DomainError);
}
