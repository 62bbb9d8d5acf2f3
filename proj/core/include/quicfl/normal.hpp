#pragma once

#include <vector>

#include "quicfl/rational.hpp"

namespace quicfl {

/// Standard normal density.
double normal_pdf(double z) noexcept;

/// Standard normal CDF, Phi(z) = erfc(-z/sqrt 2)/2.
double normal_cdf(double z) noexcept;

/// Inverse of normal_cdf on (0, 1). Rational initial guess refined by two
/// Newton steps; absolute error stays below 1e-10 away from the extremes.
double normal_quantile(double u);

/// T with Pr[|Z| > T] = p for Z ~ N(0,1). Throws DomainError unless 0 < p <= 1.
double compute_threshold(const Rational& p);
double compute_threshold(double p);

/// m points equally spaced in probability on N(0,1) truncated to [-T, T],
/// endpoints exactly -T and +T and antisymmetric by construction.
std::vector<double> compute_quantiles(int m, double threshold);

}  // namespace quicfl
