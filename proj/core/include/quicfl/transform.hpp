#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace quicfl {

enum class RotationKind { kRht, kUniform };

struct RotationSpec {
  RotationKind kind = RotationKind::kRht;
  std::uint64_t seed = 0;
  std::size_t d = 0;
  std::size_t d_pad = 0;

  /// Fills d_pad = next power of two >= d. Throws DomainError for d = 0, or
  /// for the uniform kind with d > kMaxUniformDim.
  static RotationSpec make(std::size_t d, std::uint64_t seed,
                           RotationKind kind = RotationKind::kRht);
};

inline constexpr std::size_t kMaxUniformDim = 4096;

std::size_t next_pow2(std::size_t d);

/// Unnormalized in-place Walsh-Hadamard butterfly; length must be a power of two.
void fwht(std::span<double> v);

/// y = H D pad(x) / sqrt(d_pad), signs D from the PRF keyed by spec.seed.
std::vector<double> rht_forward(std::span<const double> x, const RotationSpec& spec);

/// Inverse of rht_forward, truncated back to spec.d entries.
std::vector<double> rht_inverse(std::span<const double> y, const RotationSpec& spec);

/// Haar-distributed orthogonal matrix of size d, stored as the product of
/// d-1 Householder reflectors built from seeded Gaussian vectors and a sign
/// diagonal. This is the distribution of Q in the QR factorization of a
/// Gaussian matrix with the signs of R fixed positive, but generating and
/// applying it costs O(d^2) rather than O(d^3).
class UniformRotation {
 public:
  explicit UniformRotation(const RotationSpec& spec);

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> apply_inverse(std::span<const double> y) const;
  /// Dense d x d matrix, row-major. For tests.
  std::vector<double> matrix() const;
  std::size_t dim() const noexcept { return d_; }

 private:
  std::size_t d_;
  // Reflector k acts on coordinates k..d-1; its unit vector is stored at
  // offset k*d + k.
  std::vector<double> v_;
  std::vector<double> signs_;
};

/// Convenience wrappers keyed by spec.
std::vector<double> uniform_rotation(std::span<const double> x, const RotationSpec& spec);
std::vector<double> uniform_rotation_inverse(std::span<const double> y, const RotationSpec& spec);

}  // namespace quicfl
