// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include "topobc/errors.hpp"
#include "topobc/rng.hpp"
#include "topobc/state_model.hpp"

namespace topobc {

using cplx = std::complex<double>;
using Vec2 = std::array<cplx, 2>;

// One channel use: fading vectors to both receivers plus their noise samples.
// All entries are i.i.d. circularly-symmetric complex Gaussian, unit variance.
struct ChannelRealization {
  Vec2 h{};  // to user 1
  Vec2 g{};  // to user 2
  cplx u{};  // noise at user 1
  cplx v{};  // noise at user 2
};

inline ChannelRealization sample_realization(GaussianStream& rng) {
  ChannelRealization ch;
  ch.h = {rng.cnormal(), rng.cnormal()};
  ch.g = {rng.cnormal(), rng.cnormal()};
  ch.u = rng.cnormal();
  ch.v = rng.cnormal();
  return ch;
}

struct SnrPoint {
  double rho = 1.0;
  double log2_rho = 0.0;
  explicit SnrPoint(double rho_in) : rho(rho_in), log2_rho(std::log2(rho_in)) {
    if (!(rho_in >= 1.0)) throw std::invalid_argument("SNR must satisfy rho >= 1");
  }
  static SnrPoint from_db(double db) { return SnrPoint(std::pow(10.0, db / 10.0)); }
};

// Transpose inner product a^T b (the channel acts without conjugation).
inline cplx dot_t(const Vec2& a, const Vec2& b) { return a[0] * b[0] + a[1] * b[1]; }

inline double norm2(const Vec2& a) { return std::norm(a[0]) + std::norm(a[1]); }
inline double norm(const Vec2& a) { return std::sqrt(norm2(a)); }

inline Vec2 scaled(const Vec2& a, cplx s) { return {a[0] * s, a[1] * s}; }

// Canonical unit vector orthogonal to e under the Hermitian inner product:
// (-conj(e2), conj(e1)) / ||e||.
inline Vec2 orthogonal_complement(const Vec2& e) {
  const double n = norm(e);
  if (!(n > 0.0)) throw ZeroVector();
  return {-std::conj(e[1]) / n, std::conj(e[0]) / n};
}

// Unit direction w with ch^T w == 0 exactly; what a precoder uses to hide a
// symbol from the receiver behind ch.
inline Vec2 zf_direction(const Vec2& ch) {
  const double n = norm(ch);
  if (!(n > 0.0)) throw ZeroVector();
  return {-ch[1] / n, ch[0] / n};
}

// Unit direction w with ch^T w == ||ch|| (real, positive).
inline Vec2 matched_direction(const Vec2& ch) {
  const double n = norm(ch);
  if (!(n > 0.0)) throw ZeroVector();
  return {std::conj(ch[0]) / n, std::conj(ch[1]) / n};
}

inline double link_exponent(Link a, double alpha) { return a == Link::Strong ? 1.0 : alpha; }

// Received pair (y, z) for a transmit vector under the two-exponent model:
// y = rho^{A1/2} h^T x + u,  z = rho^{A2/2} g^T x + v.
inline std::pair<cplx, cplx> receive(const Vec2& x, const ChannelRealization& ch,
                                     TopologyPair topo, const SnrPoint& snr, double alpha) {
  const double a1 = link_exponent(topo.a1, alpha);
  const double a2 = link_exponent(topo.a2, alpha);
  const cplx y = std::pow(snr.rho, a1 / 2.0) * dot_t(ch.h, x) + ch.u;
  const cplx z = std::pow(snr.rho, a2 / 2.0) * dot_t(ch.g, x) + ch.v;
  return {y, z};
}

}  // namespace topobc
