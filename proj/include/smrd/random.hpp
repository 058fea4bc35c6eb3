#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "smrd/core.hpp"

namespace smrd {

using Rng = std::mt19937_64;

// Stable 64-bit sub-seed for a (seed, purpose) pair; FNV-1a over the label, then a splitmix64 finalizer.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ull;
  for (char ch : label) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (h ^ (index + 1));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, label, index));
}

// Box-Muller on top of the raw engine so draws are identical across standard libraries.
inline double standard_normal(Rng& rng) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  constexpr double inv_2_53 = 1.0 / 9007199254740992.0;
  double u1 = 0.0;
  while (u1 == 0.0) u1 = static_cast<double>(rng() >> 11) * inv_2_53;
  const double u2 = static_cast<double>(rng() >> 11) * inv_2_53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// Complex entries with independent N(0, component_std^2) real and imaginary parts.
inline ComplexImage complex_gaussian(Eigen::Index height, Eigen::Index width, Rng& rng, double component_std = 1.0) {
  ComplexImage out(height, width);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double re = standard_normal(rng);
    const double im = standard_normal(rng);
    out.data()[i] = Complex(component_std * re, component_std * im);
  }
  return out;
}

}  // namespace smrd
