#include "quicfl/transform.hpp"

#include <cmath>
#include <random>

#include "quicfl/error.hpp"
#include "quicfl/prf.hpp"

namespace quicfl {

namespace {

void check_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw DomainError("input contains a non-finite value");
}

}  // namespace

std::size_t next_pow2(std::size_t d) {
  std::size_t p = 1;
  while (p < d) p <<= 1;
  return p;
}

RotationSpec RotationSpec::make(std::size_t d, std::uint64_t seed, RotationKind kind) {
  if (d == 0) throw DomainError("dimension must be at least 1");
  if (kind == RotationKind::kUniform && d > kMaxUniformDim) {
    throw DomainError("uniform rotation is limited to d <= 4096; use the RHT for larger inputs");
  }
  return {kind, seed, d, next_pow2(d)};
}

void fwht(std::span<double> v) {
  const std::size_t n = v.size();
  if (n == 0 || (n & (n - 1))) throw DomainError("fwht length must be a power of two");
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t i = 0; i < n; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        double a = v[j], b = v[j + len];
        v[j] = a + b;
        v[j + len] = a - b;
      }
    }
  }
}

std::vector<double> rht_forward(std::span<const double> x, const RotationSpec& spec) {
  if (x.size() == 0 || spec.d == 0) throw DomainError("dimension must be at least 1");
  if (x.size() != spec.d) throw DomainError("input length does not match the rotation spec");
  check_finite(x);
  std::vector<double> y(spec.d_pad, 0.0);
  for (std::size_t i = 0; i < spec.d; ++i) y[i] = prf_sign(spec.seed, i) * x[i];
  fwht(y);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.d_pad));
  for (double& v : y) v *= scale;
  return y;
}

std::vector<double> rht_inverse(std::span<const double> y, const RotationSpec& spec) {
  if (y.size() != spec.d_pad) throw DomainError("inverse input length must equal d_pad");
  std::vector<double> t(y.begin(), y.end());
  fwht(t);
  const double scale = 1.0 / std::sqrt(static_cast<double>(spec.d_pad));
  std::vector<double> x(spec.d);
  for (std::size_t i = 0; i < spec.d; ++i) x[i] = prf_sign(spec.seed, i) * t[i] * scale;
  return x;
}

UniformRotation::UniformRotation(const RotationSpec& spec) : d_(spec.d) {
  if (spec.kind != RotationKind::kUniform) throw DomainError("spec is not a uniform rotation");
  if (d_ == 0) throw DomainError("dimension must be at least 1");
  if (d_ > kMaxUniformDim) {
    throw DomainError("uniform rotation is limited to d <= 4096; use the RHT for larger inputs");
  }
  std::mt19937_64 gen(mix64(spec.seed ^ 0x554e49464f524dULL));
  std::normal_distribution<double> normal;
  v_.assign(d_ * d_, 0.0);
  signs_.assign(d_, 1.0);
  for (std::size_t k = 0; k + 1 < d_; ++k) {
    double* v = v_.data() + k * d_ + k;
    const std::size_t len = d_ - k;
    double norm2 = 0;
    for (std::size_t i = 0; i < len; ++i) {
      v[i] = normal(gen);
      norm2 += v[i] * v[i];
    }
    // Reflect g onto sign(g0)|g| e1; the diagonal of R is then -sign(g0)|g|,
    // and folding its sign into signs_ makes it positive.
    double alpha = std::sqrt(norm2);
    double s = v[0] >= 0 ? 1.0 : -1.0;
    signs_[k] = -s;
    v[0] += s * alpha;
    double vn = 0;
    for (std::size_t i = 0; i < len; ++i) vn += v[i] * v[i];
    vn = std::sqrt(vn);
    for (std::size_t i = 0; i < len; ++i) v[i] /= vn;
  }
  signs_[d_ - 1] = normal(gen) >= 0 ? 1.0 : -1.0;
}

// Q = H_0 H_1 ... H_{d-2} S
std::vector<double> UniformRotation::apply(std::span<const double> x) const {
  if (x.size() != d_) throw DomainError("input length does not match the rotation");
  check_finite(x);
  std::vector<double> y(d_);
  for (std::size_t i = 0; i < d_; ++i) y[i] = signs_[i] * x[i];
  for (std::size_t k = d_ - 1; k-- > 0;) {
    const double* v = v_.data() + k * d_ + k;
    const std::size_t len = d_ - k;
    double dot = 0;
    for (std::size_t i = 0; i < len; ++i) dot += v[i] * y[k + i];
    for (std::size_t i = 0; i < len; ++i) y[k + i] -= 2 * dot * v[i];
  }
  return y;
}

std::vector<double> UniformRotation::apply_inverse(std::span<const double> y) const {
  if (y.size() != d_) throw DomainError("input length does not match the rotation");
  std::vector<double> x(y.begin(), y.end());
  for (std::size_t k = 0; k + 1 < d_; ++k) {
    const double* v = v_.data() + k * d_ + k;
    const std::size_t len = d_ - k;
    double dot = 0;
    for (std::size_t i = 0; i < len; ++i) dot += v[i] * x[k + i];
    for (std::size_t i = 0; i < len; ++i) x[k + i] -= 2 * dot * v[i];
  }
  for (std::size_t i = 0; i < d_; ++i) x[i] *= signs_[i];
  return x;
}

std::vector<double> UniformRotation::matrix() const {
  std::vector<double> m(d_ * d_);
  std::vector<double> e(d_, 0.0);
  for (std::size_t j = 0; j < d_; ++j) {
    e[j] = 1.0;
    auto col = apply(e);
    for (std::size_t i = 0; i < d_; ++i) m[i * d_ + j] = col[i];
    e[j] = 0.0;
  }
  return m;
}

std::vector<double> uniform_rotation(std::span<const double> x, const RotationSpec& spec) {
  return UniformRotation(spec).apply(x);
}

std::vector<double> uniform_rotation_inverse(std::span<const double> y, const RotationSpec& spec) {
  return UniformRotation(spec).apply_inverse(y);
}

}  // namespace quicfl
