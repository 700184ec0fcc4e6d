#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace hom {

// Counter-based randomness. Every Gaussian draw used by the simulator is a pure
// function of (seed, stream, index): Philox4x32-10 maps the 128-bit counter
// (index, stream) under the 64-bit key `seed` to 128 random bits, the low 64
// bits become a uniform on (0, 1), and the inverse normal CDF turns that into
// a standard normal. No generator state is carried between draws, so paths can
// be generated in any order, on any number of threads, and resumed mid-way.

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key);

/// 52-bit uniform strictly inside (0, 1).
double uniform_open01(std::uint64_t bits);

/// Standard normal quantile. Acklam's rational approximation followed by one
/// Halley step against erfc, accurate to a few ulp over (0, 1).
double inverse_normal_cdf(double p);

double normal_cdf(double x);

/// Deterministic standard-normal draw number `index` of substream `stream`.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Derives an independent seed for a named purpose ("forecast/hom", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view purpose);

}  // namespace hom
