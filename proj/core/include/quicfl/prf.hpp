#pragma once

#include <cstdint>

namespace quicfl {

/// Version of the counter-based generator below; written into wire headers.
/// Any change to the mixing constants must bump it.
inline constexpr std::uint32_t kPrfVersion = 1;

/// Domain tags keep the streams drawn from one seed independent.
enum class PrfDomain : std::uint64_t {
  kSigns = 0x5349474e53000001ULL,
  kShared = 0x5348415245440002ULL,
  kPrivate = 0x5052495641540003ULL,
  kGeneric = 0x47454e4552490004ULL,
};

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

/// Stateless 64-bit PRF: PRF(seed, counter). Two rounds of the splitmix
/// finalizer over the key and counter.
inline constexpr std::uint64_t prf(std::uint64_t seed, std::uint64_t counter,
                                   PrfDomain domain = PrfDomain::kGeneric) noexcept {
  std::uint64_t key = mix64(seed ^ static_cast<std::uint64_t>(domain));
  return mix64(key + 0x9e3779b97f4a7c15ULL * (counter + 1));
}

/// Uniform double in [0, 1) with 53 random bits.
inline constexpr double prf_uniform(std::uint64_t seed, std::uint64_t counter,
                                    PrfDomain domain = PrfDomain::kPrivate) noexcept {
  return static_cast<double>(prf(seed, counter, domain) >> 11) * 0x1.0p-53;
}

/// Sign for coordinate i of the rotation keyed by seed: +1 or -1.
inline constexpr double prf_sign(std::uint64_t seed, std::uint64_t i) noexcept {
  return (prf(seed, i, PrfDomain::kSigns) & 1ULL) ? -1.0 : 1.0;
}

/// Shared-randomness index in [0, 2^ell) for coordinate i.
inline constexpr std::uint32_t prf_shared(std::uint64_t seed, std::uint64_t i,
                                          int ell) noexcept {
  if (ell == 0) return 0;
  return static_cast<std::uint32_t>(prf(seed, i, PrfDomain::kShared) >> (64 - ell));
}

/// Derives a child seed, e.g. per (trial, client) streams.
inline constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                           std::uint64_t b = 0) noexcept {
  return prf(prf(seed, a), b);
}

}  // namespace quicfl
