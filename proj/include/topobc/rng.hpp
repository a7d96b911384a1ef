// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>

namespace topobc {

namespace detail {

// Philox4x32-10 counter-based generator. Every draw is a pure function of
// (key, counter), so trials can run on any number of workers and still
// produce identical streams.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
    const std::array<std::uint32_t, 4> next = {
        static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
        static_cast<std::uint32_t>(p1),
        static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
        static_cast<std::uint32_t>(p0)};
    ctr = next;
    key[0] += kW0;
    key[1] += kW1;
  }
  return ctr;
}

}  // namespace detail

// Deterministic Gaussian stream keyed by (seed, stream, trial). Normals come
// from Box-Muller on Philox uniforms; a complex draw uses one full block.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint32_t stream, std::uint32_t trial)
      : key_{static_cast<std::uint32_t>(seed & 0xffffffffu),
             static_cast<std::uint32_t>(seed >> 32)},
        trial_(trial),
        stream_(stream) {}

  // One real N(0,1) sample.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto [a, b] = normal_pair();
    spare_ = b;
    have_spare_ = true;
    return a;
  }

  // Circularly-symmetric complex Gaussian, zero mean, unit total variance.
  std::complex<double> cnormal() {
    const auto [a, b] = normal_pair();
    constexpr double kInvSqrt2 = 0.7071067811865475244;
    return {a * kInvSqrt2, b * kInvSqrt2};
  }

  // Uniform in (0,1).
  double uniform() {
    const auto r = next_block();
    const std::uint64_t x = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
  }

 private:
  std::array<std::uint32_t, 4> next_block() {
    const std::array<std::uint32_t, 4> ctr = {counter_++, 0u, trial_, stream_};
    return detail::philox4x32(ctr, key_);
  }

  std::pair<double, double> normal_pair() {
    const auto r = next_block();
    const std::uint64_t x = (static_cast<std::uint64_t>(r[0]) << 32) | r[1];
    const std::uint64_t y = (static_cast<std::uint64_t>(r[2]) << 32) | r[3];
    const double u1 = (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
    const double u2 = (static_cast<double>(y >> 11) + 0.5) * 0x1p-53;
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = kTwoPi * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t trial_;
  std::uint32_t stream_;
  std::uint32_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace topobc
