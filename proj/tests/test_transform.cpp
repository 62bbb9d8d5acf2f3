#include <gtest/gtest.h>

#include <bit>
#include <cmath>

#include "quicfl/error.hpp"
#include "quicfl/prf.hpp"
#include "quicfl/transform.hpp"

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

double sqnorm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace

TEST(Fwht, MatchesSylvesterMatrix) {
  for (std::size_t n : {1u, 2u, 8u, 64u}) {
    auto x = gaussian(n, n);
    auto y = x;
    fwht(y);
    for (std::size_t i = 0; i < n; ++i) {
      double want = 0;
      for (std::size_t j = 0; j < n; ++j) want += ((std::popcount(i & j) & 1) ? -1.0 : 1.0) * x[j];
      EXPECT_NEAR(y[i], want, 1e-12 * n);
    }
  }
}

TEST(Fwht, RejectsNonPowerOfTwo) {
  std::vector<double> v(6);
  EXPECT_THROW(fwht(v), DomainError);
}

TEST(Rht, InverseRecoversInputAndPreservesNorm) {
  for (std::size_t d : {1u, 3u, 1000u, 1024u, 4097u}) {
    auto spec = RotationSpec::make(d, 99);
    EXPECT_EQ(spec.d_pad, next_pow2(d));
    auto x = gaussian(d, d + 1);
    auto y = rht_forward(x, spec);
    ASSERT_EQ(y.size(), spec.d_pad);
    EXPECT_NEAR(sqnorm(y), sqnorm(x), 1e-10 * sqnorm(x));
    auto back = rht_inverse(y, spec);
    ASSERT_EQ(back.size(), d);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
  }
}

TEST(Rht, SignsComeFromSeed) {
  auto a = RotationSpec::make(64, 1), b = RotationSpec::make(64, 2);
  std::vector<double> e(64, 0.0);
  e[5] = 1;
  auto ya = rht_forward(e, a), yb = rht_forward(e, b);
  // A unit vector maps to +-1/8 everywhere; the sign pattern follows the seed.
  for (double v : ya) EXPECT_NEAR(std::abs(v), 0.125, 1e-15);
  EXPECT_NEAR(ya[0], prf_sign(1, 5) * 0.125, 1e-15);
  EXPECT_NEAR(yb[0], prf_sign(2, 5) * 0.125, 1e-15);
}

TEST(Rht, ShapeErrors) {
  EXPECT_THROW(RotationSpec::make(0, 1), DomainError);
  auto spec = RotationSpec::make(10, 1);
  std::vector<double> x(9);
  EXPECT_THROW(rht_forward(x, spec), DomainError);
  std::vector<double> y(10);
  EXPECT_THROW(rht_inverse(y, spec), DomainError);
}

TEST(UniformRotation, OrthogonalAndInvertible) {
  const std::size_t d = 24;
  UniformRotation q(RotationSpec::make(d, 5, RotationKind::kUniform));
  auto m = q.matrix();
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double dot = 0;
      for (std::size_t k = 0; k < d; ++k) dot += m[i * d + k] * m[j * d + k];
      EXPECT_NEAR(dot, i == j ? 1.0 : 0.0, 1e-12);
    }
  auto x = gaussian(d, 3);
  auto y = q.apply(x);
  for (std::size_t i = 0; i < d; ++i) {
    double want = 0;
    for (std::size_t k = 0; k < d; ++k) want += m[i * d + k] * x[k];
    EXPECT_NEAR(y[i], want, 1e-12);
  }
  auto back = q.apply_inverse(y);
  for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
}

TEST(UniformRotation, FirstRowIsUniformOnSphere) {
  // For a Haar rotation, the image of e_0 has E[y_0^2] = 1/d.
  const std::size_t d = 8;
  const int reps = 4000;
  double acc = 0;
  std::vector<double> e(d, 0.0);
  e[0] = 1;
  for (int s = 0; s < reps; ++s) {
    auto y = uniform_rotation(e, RotationSpec::make(d, s, RotationKind::kUniform));
    acc += y[0] * y[0] / reps;
  }
  // Var(y_0^2) = 2(d-1)/(d^2(d+2)).
  const double sd = std::sqrt(2.0 * (d - 1) / (d * d * (d + 2.0)) / reps);
  EXPECT_NEAR(acc, 1.0 / d, 5 * sd);
}

TEST(UniformRotation, SizeLimit) {
  EXPECT_THROW(RotationSpec::make(kMaxUniformDim + 1, 1, RotationKind::kUniform), DomainError);
}
